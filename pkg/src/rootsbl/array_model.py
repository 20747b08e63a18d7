"""
Uniform linear array model
==========================

Steering vectors, their derivatives with respect to the phase variable
``v = exp(-j*2*pi*(d/lambda)*sin(theta))``, dictionaries over angle grids and
synthetic snapshot generation.

All public functions take angles in degrees; radians are used internally.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from rootsbl.errors import ContractError


def deg2rad(theta):
    return np.deg2rad(np.asarray(theta, dtype=float))


def rad2deg(theta):
    return np.rad2deg(np.asarray(theta, dtype=float))


@dataclass(frozen=True)
class ArrayGeometry:
    """ULA with ``sensor_count`` elements spaced ``spacing_ratio`` wavelengths apart."""

    sensor_count: int
    spacing_ratio: float = 0.5

    def __post_init__(self):
        if int(self.sensor_count) != self.sensor_count or self.sensor_count < 2:
            raise ContractError(f"sensor_count must be an integer >= 2, got {self.sensor_count}")
        if not 0.0 < self.spacing_ratio <= 0.5:
            raise ContractError(f"spacing_ratio must lie in (0, 0.5], got {self.spacing_ratio}")

    @property
    def M(self) -> int:
        return int(self.sensor_count)

    def phase(self, theta_deg) -> np.ndarray:
        """Unit-modulus phase variable ``v`` for angle(s) in degrees."""
        return np.exp(-2j * np.pi * self.spacing_ratio * np.sin(deg2rad(theta_deg)))

    def angle_from_phase(self, z) -> np.ndarray:
        """Inverse of :meth:`phase` using the argument of ``z``.

        Returns NaN where the arcsin argument falls outside [-1, 1], which can
        only happen for ``spacing_ratio < 0.5``.
        """
        arg = -np.angle(z) / (2 * np.pi * self.spacing_ratio)
        with np.errstate(invalid="ignore"):
            out = np.where(np.abs(arg) <= 1.0, np.arcsin(np.clip(arg, -1.0, 1.0)), np.nan)
        return rad2deg(out)


@dataclass(frozen=True)
class Scenario:
    """One synthetic experiment: geometry, true DOAs (degrees), snapshots, SNR and seed.

    ``snr_db = inf`` produces noiseless data.
    """

    geometry: ArrayGeometry
    source_angles: tuple
    snapshot_count: int
    snr_db: float
    seed: int = 0

    def __post_init__(self):
        angles = tuple(float(a) for a in np.atleast_1d(self.source_angles))
        object.__setattr__(self, "source_angles", angles)
        if len(angles) < 1:
            raise ContractError("at least one source is required")
        if len(set(angles)) != len(angles):
            raise ContractError("source angles must be pairwise distinct")
        if any(not -90.0 < a < 90.0 for a in angles):
            raise ContractError("source angles must lie in (-90, 90) degrees")
        if self.snapshot_count < 1:
            raise ContractError("snapshot_count must be >= 1")

    @property
    def K(self) -> int:
        return len(self.source_angles)

    @property
    def noise_variance(self) -> float:
        return 0.0 if np.isposinf(self.snr_db) else 10.0 ** (-self.snr_db / 10.0)


@dataclass(frozen=True)
class SnapshotMatrix:
    """M x T complex observation matrix."""

    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        Y = np.asarray(self.entries, dtype=complex)
        if Y.ndim != 2:
            raise ContractError(f"snapshot matrix must be 2-D, got shape {Y.shape}")
        if not np.all(np.isfinite(Y)):
            raise ContractError("snapshot matrix has non-finite entries")
        object.__setattr__(self, "entries", Y)

    @property
    def M(self) -> int:
        return self.entries.shape[0]

    @property
    def T(self) -> int:
        return self.entries.shape[1]


def _as_matrix(Y) -> np.ndarray:
    if isinstance(Y, SnapshotMatrix):
        return Y.entries
    return np.asarray(Y, dtype=complex)


def steering_vector(geometry: ArrayGeometry, theta: float) -> np.ndarray:
    """Steering vector ``[1, v, ..., v^(M-1)]`` for a single angle in degrees."""
    if not -90.0 <= theta <= 90.0:
        raise ContractError(f"angle {theta} outside [-90, 90] degrees")
    v = geometry.phase(theta)
    return v ** np.arange(geometry.M)


def steering_derivative(geometry: ArrayGeometry, v: complex) -> np.ndarray:
    """Derivative of the steering vector with respect to ``v``.

    Entry ``m`` (zero-based) is ``m * v**(m-1)``; entry 0 is zero.
    """
    if v == 0:
        raise ContractError("v must be nonzero")
    m = np.arange(geometry.M)
    out = np.zeros(geometry.M, dtype=complex)
    out[1:] = m[1:] * complex(v) ** (m[1:] - 1)
    return out


def build_dictionary(geometry: ArrayGeometry, angles: Sequence[float]) -> np.ndarray:
    """Stack steering vectors for strictly increasing ``angles`` (degrees) into an M x K matrix."""
    angles = np.asarray(angles, dtype=float).ravel()
    if angles.size == 0:
        raise ContractError("angle list is empty")
    if np.any(np.diff(angles) <= 0):
        raise ContractError("angles must be strictly increasing")
    if angles[0] < -90.0 or angles[-1] > 90.0:
        raise ContractError("angles must lie in [-90, 90] degrees")
    v = geometry.phase(angles)
    return v[np.newaxis, :] ** np.arange(geometry.M)[:, np.newaxis]


def synthesize_snapshots(scenario: Scenario) -> SnapshotMatrix:
    """Draw ``Y = A S + N`` with unit-power uncorrelated sources and white noise.

    Sources and noise are circular complex Gaussian; the noise variance is
    ``10**(-snr_db/10)``. The output is a pure function of the scenario.
    """
    geo = scenario.geometry
    rng = np.random.default_rng(scenario.seed)
    K, T, M = scenario.K, scenario.snapshot_count, geo.M
    A = np.column_stack([steering_vector(geo, th) for th in scenario.source_angles])
    S = (rng.standard_normal((K, T)) + 1j * rng.standard_normal((K, T))) / np.sqrt(2)
    N = (rng.standard_normal((M, T)) + 1j * rng.standard_normal((M, T))) / np.sqrt(2)
    Y = A @ S + np.sqrt(scenario.noise_variance) * N
    return SnapshotMatrix(Y)


def read_snapshots(path) -> SnapshotMatrix:
    """Parse the snapshot text format.

    Line 1 holds ``M T``; each of the next M lines holds T entries ``re,im``.
    """
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise ContractError(f"{path}: empty snapshot file")
    try:
        M, T = (int(tok) for tok in lines[0].split())
    except ValueError as exc:
        raise ContractError(f"{path}: header must be 'M T'") from exc
    if len(lines) - 1 != M:
        raise ContractError(f"{path}: expected {M} data lines, found {len(lines) - 1}")
    Y = np.empty((M, T), dtype=complex)
    for m, line in enumerate(lines[1:]):
        toks = line.split()
        if len(toks) != T:
            raise ContractError(f"{path}: line {m + 2} has {len(toks)} entries, expected {T}")
        for t, tok in enumerate(toks):
            try:
                re, im = tok.split(",")
                Y[m, t] = complex(float(re), float(im))
            except ValueError as exc:
                raise ContractError(f"{path}: bad entry {tok!r} on line {m + 2}") from exc
    return SnapshotMatrix(Y)


def write_snapshots(Y, path) -> None:
    """Write ``Y`` in the format read by :func:`read_snapshots` (round-trip exact)."""
    Y = _as_matrix(Y)
    M, T = Y.shape
    rows = [f"{M} {T}"]
    for m in range(M):
        rows.append(" ".join(f"{float(z.real)!r},{float(z.imag)!r}" for z in Y[m]))
    Path(path).write_text("\n".join(rows) + "\n")
