"""
Sparse Bayesian learning by expectation-maximization
====================================================

Model: ``y_t ~ CN(A s_t, beta^-1 I)``, ``s_t ~ CN(0, diag(delta))`` with a
``Gamma(1, rho)`` prior on each ``delta_i`` and ``Gamma(a, b)`` on ``beta``.
The signals are the hidden variables; the E-step gives the Gaussian posterior
``(mu_t, Sigma)`` and the M-step has closed forms for ``delta`` and ``beta``.
When enabled, the grid angles are also refined after each M-step (see
:mod:`rootsbl.grid_refine`).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from scipy.linalg import solve_triangular

from rootsbl.errors import ContractError, NumericalError
from rootsbl.grid_refine import Grid, refinement_pass

logger = logging.getLogger(__name__)

JITTER = 1e-12


@dataclass
class Hyperparams:
    delta: np.ndarray
    beta: float
    rho: float = 0.01
    a: float = 1e-6
    b: float = 1e-6

    def __post_init__(self):
        self.delta = np.asarray(self.delta, dtype=float)
        if np.any(self.delta <= 0) or not self.beta > 0 or not self.rho > 0:
            raise ContractError("delta, beta and rho must be strictly positive")


@dataclass
class Posterior:
    """Posterior mean (K x T, column t is ``mu_t``) and shared covariance (K x K)."""

    mu: np.ndarray
    sigma: np.ndarray


@dataclass(frozen=True)
class EmConfig:
    """EM controller settings.

    ``beta_floor`` is the smallest admissible noise variance expressed as a
    fraction of the mean per-entry power of ``Y``. ``warmup`` iterations run
    before grid refinement starts.
    """

    max_iters: int = 500
    tol_delta: float = 1e-4
    eta: int = 1
    refinement_enabled: bool = True
    beta_floor: float = 1e-3
    rho: float = 0.01
    a: float = 1e-6
    b: float = 1e-6
    warmup: int = 0
    delta_min_ratio: float = 1e-12
    track_evidence: bool = False

    def __post_init__(self):
        if self.max_iters < 1:
            raise ContractError("max_iters must be >= 1")
        if not self.tol_delta > 0:
            raise ContractError("tol_delta must be > 0")
        if self.eta < 1:
            raise ContractError("eta must be >= 1")
        if not self.rho > 0 or self.a < 0 or self.b < 0:
            raise ContractError("rho must be > 0 and a, b >= 0")


class EmResult(NamedTuple):
    hyperparams: Hyperparams
    posterior: Posterior
    grid: Grid
    iterations: int
    evidence: list | None = None


def _matrix(Y) -> np.ndarray:
    return getattr(Y, "entries", Y)


def _cholesky_with_jitter(C: np.ndarray, what: str) -> np.ndarray:
    n = C.shape[0]
    try:
        return np.linalg.cholesky(C)
    except np.linalg.LinAlgError:
        jitter = JITTER * np.trace(C).real / n
        try:
            return np.linalg.cholesky(C + jitter * np.eye(n))
        except np.linalg.LinAlgError as exc:
            raise NumericalError(
                f"{what} not positive definite after diagonal jitter {jitter:.3e} (size {n})"
            ) from exc


def compute_posterior(Y, A, hp: Hyperparams) -> Posterior:
    """Gaussian posterior of the signals given ``delta`` and ``beta``.

    ``Sigma = (beta A^H A + diag(1/delta))^-1`` and ``mu_t = beta Sigma A^H y_t``,
    evaluated through the M x M data covariance ``C = I/beta + A diag(delta) A^H``:
    ``Sigma = D - D A^H C^-1 A D`` and ``mu_t = D A^H C^-1 y_t``. This costs
    ``O(M K^2)`` per call instead of ``O(K^3)``.
    """
    Y = _matrix(Y)
    M = A.shape[0]
    AD = A * hp.delta
    C = AD @ A.conj().T
    C[np.diag_indices(M)] += 1.0 / hp.beta
    L = _cholesky_with_jitter(C, "data covariance")
    W = solve_triangular(L, AD, lower=True, check_finite=False)
    sigma = -(W.conj().T @ W)
    sigma[np.diag_indices(A.shape[1])] += hp.delta
    sigma = 0.5 * (sigma + sigma.conj().T)
    mu = W.conj().T @ solve_triangular(L, Y, lower=True, check_finite=False)
    if not (np.all(np.isfinite(sigma)) and np.all(np.isfinite(mu))):
        raise NumericalError(
            f"posterior statistics are not finite (beta={hp.beta:.3e}, "
            f"delta range [{hp.delta.min():.3e}, {hp.delta.max():.3e}])"
        )
    return Posterior(mu, sigma)


def update_delta(post: Posterior, T: int, rho: float, delta_min: float = 0.0) -> np.ndarray:
    """M-step for the signal variances.

    Positive root of ``rho d^2 + T d - c_i = 0`` with
    ``c_i = sum_t |mu_ti|^2 + T Sigma_ii``, written in the cancellation-free
    form ``2 c / (T + sqrt(T^2 + 4 rho c))``. Values at or below ``delta_min``
    are clamped to it.
    """
    if not rho > 0:
        raise ContractError("rho must be > 0")
    c = np.sum(np.abs(post.mu) ** 2, axis=1) + T * np.diag(post.sigma).real
    c = np.maximum(c, 0.0)
    delta = 2.0 * c / (T + np.sqrt(T * T + 4.0 * rho * c))
    return np.maximum(delta, delta_min) if delta_min > 0 else delta


def expected_misfit(Y, A, post: Posterior) -> tuple[float, float]:
    """``(sum_t ||y_t - A mu_t||^2, tr(A Sigma A^H))``."""
    Y = _matrix(Y)
    resid = float(np.sum(np.abs(Y - A @ post.mu) ** 2))
    trace = float(np.sum(((A @ post.sigma) * A.conj()).real))
    return resid, trace


def update_beta(Y, A, post: Posterior, a: float, b: float, beta_max: float = np.inf) -> float:
    """M-step for the noise precision, capped at ``beta_max``."""
    Y = _matrix(Y)
    M, T = Y.shape
    resid, trace = expected_misfit(Y, A, post)
    denom = b + resid + T * trace
    if not denom > 0:
        raise NumericalError(f"noise precision update has non-positive denominator {denom}")
    return float(min((T * M + a - 1.0) / denom, beta_max))


def evaluate_evidence(Y, A, hp: Hyperparams) -> float:
    """Log marginal likelihood plus log hyperpriors, dropping ``delta``/``beta``-free constants.

    ``sum_t ln CN(y_t | 0, C) + sum_i (ln rho - rho delta_i) + (a-1) ln beta - b beta``
    with ``C = I/beta + A diag(delta) A^H``.
    """
    Y = _matrix(Y)
    M, T = Y.shape
    C = (A * hp.delta) @ A.conj().T
    C[np.diag_indices(M)] += 1.0 / hp.beta
    L = _cholesky_with_jitter(C, "data covariance")
    logdet = 2.0 * np.sum(np.log(np.diag(L).real))
    W = solve_triangular(L, Y, lower=True, check_finite=False)
    quad = float(np.sum(np.abs(W) ** 2))
    data = -T * M * np.log(np.pi) - T * logdet - quad
    prior_delta = np.sum(np.log(hp.rho) - hp.rho * hp.delta)
    prior_beta = (hp.a - 1.0) * np.log(hp.beta) - hp.b * hp.beta
    return float(data + prior_delta + prior_beta)


def initial_hyperparams(Y, A, cfg: EmConfig) -> tuple[Hyperparams, float, float]:
    """Matched-filter start. Returns ``(hp, delta_min, beta_max)``."""
    Y = _matrix(Y)
    M, T = Y.shape
    power = float(np.mean(np.abs(Y) ** 2))
    if not power > 0:
        raise NumericalError("snapshot matrix has zero power")
    delta0 = np.sum(np.abs(A.conj().T @ Y) ** 2, axis=1) / (T * M * M)
    delta_min = cfg.delta_min_ratio * float(delta0.max())
    delta0 = np.maximum(delta0, delta_min)
    hp = Hyperparams(delta0, 1.0 / (0.1 * power), cfg.rho, cfg.a, cfg.b)
    return hp, delta_min, 1.0 / (cfg.beta_floor * power)


def run_em(Y, grid: Grid, cfg: EmConfig) -> EmResult:
    """Alternate E-step, ``delta`` and ``beta`` updates and (optionally) grid refinement.

    Stops when the largest relative change of ``delta`` drops below
    ``cfg.tol_delta`` or after ``cfg.max_iters`` iterations. ``grid`` is not
    modified; the refined copy is returned. The returned posterior is
    recomputed from the final hyperparameters and grid.
    """
    Y = _matrix(Y)
    T = Y.shape[1]
    if Y.shape[0] != grid.geometry.M:
        raise ContractError(f"Y has {Y.shape[0]} rows but the array has {grid.geometry.M} sensors")
    if cfg.eta > len(grid):
        raise ContractError(f"eta={cfg.eta} exceeds grid size {len(grid)}")
    grid = grid.copy()
    hp, delta_min, beta_max = initial_hyperparams(Y, grid.dictionary, cfg)
    evidence = [evaluate_evidence(Y, grid.dictionary, hp)] if cfg.track_evidence else None

    it = 0
    for it in range(1, cfg.max_iters + 1):
        A = grid.dictionary
        post = compute_posterior(Y, A, hp)
        delta = update_delta(post, T, hp.rho, delta_min)
        beta = update_beta(Y, A, post, hp.a, hp.b, beta_max)
        change = np.max(np.abs(delta - hp.delta) / np.maximum(hp.delta, delta_min))
        hp = replace(hp, delta=delta, beta=beta)
        if cfg.refinement_enabled and it > cfg.warmup:
            refinement_pass(Y, grid, post, cfg.eta, delta, delta_min)
        if evidence is not None:
            evidence.append(evaluate_evidence(Y, grid.dictionary, hp))
        if change < cfg.tol_delta:
            break
    else:
        logger.debug("EM stopped at max_iters=%d", cfg.max_iters)

    post = compute_posterior(Y, grid.dictionary, hp)
    return EmResult(hp, post, grid, it, evidence)
