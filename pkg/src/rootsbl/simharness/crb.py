"""Stochastic Cramer-Rao bound for uncorrelated Gaussian sources on a ULA."""

from __future__ import annotations

import numpy as np

from rootsbl.array_model import ArrayGeometry, Scenario, build_dictionary
from rootsbl.errors import ContractError, NumericalError


def _steering_and_derivative(geometry: ArrayGeometry, angles_deg):
    angles = np.sort(np.asarray(angles_deg, dtype=float))
    A = build_dictionary(geometry, angles)
    m = np.arange(geometry.M)[:, None]
    # d a / d theta in radians
    D = A * (-2j * np.pi * geometry.spacing_ratio * np.cos(np.deg2rad(angles)))[None, :] * m
    return A, D


def crb_matrix(geometry: ArrayGeometry, angles_deg, snapshots: int, snr_db: float) -> np.ndarray:
    """CRB matrix for the angles in radians^2, sources with unit power.

    ``sigma^2 / (2T) * inv(Re[(D^H P_perp D) .* (P A^H R^-1 A P)^T])``
    """
    K = len(angles_deg)
    M = geometry.M
    if not K < M:
        raise ContractError(f"CRB needs fewer sources ({K}) than sensors ({M})")
    noise = 10.0 ** (-snr_db / 10.0)
    A, D = _steering_and_derivative(geometry, angles_deg)
    P = np.eye(K)
    R = A @ P @ A.conj().T + noise * np.eye(M)
    proj_perp = np.eye(M) - A @ np.linalg.solve(A.conj().T @ A, A.conj().T)
    H = D.conj().T @ proj_perp @ D
    G = P @ A.conj().T @ np.linalg.solve(R, A) @ P
    F = np.real(H * G.T)
    try:
        return noise / (2.0 * snapshots) * np.linalg.inv(F)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("singular Fisher information") from exc


def stochastic_crb(scenario: Scenario) -> float:
    """``sqrt(mean(diag(CRB)))`` in degrees for the scenario's true angles."""
    if not np.isfinite(scenario.snr_db):
        return 0.0
    C = crb_matrix(scenario.geometry, scenario.source_angles, scenario.snapshot_count, scenario.snr_db)
    return float(np.rad2deg(np.sqrt(np.mean(np.diag(C)))))


def crb_curve(cfg) -> list[dict]:
    """Reference CRB per (snr, grid interval), averaged over the sweep's DOA draws.

    The average is taken on the squared bound, matching how sweep RMSE
    aggregates squared errors.
    """
    from rootsbl.simharness.sweep import draw_doas, trial_seed

    out = []
    for snr in cfg.snr_db:
        sq = []
        for trial in range(cfg.trials):
            doas = draw_doas(trial_seed(cfg.master_seed, trial), cfg.intervals)
            sc = Scenario(cfg.geometry, doas, cfg.snapshots, snr)
            sq.append(stochastic_crb(sc) ** 2)
        value = float(np.sqrt(np.mean(sq)))
        for r in cfg.grid_interval:
            out.append({"snr_db": snr, "grid_interval": r, "crb_deg": value})
    return out
