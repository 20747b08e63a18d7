"""Estimator front ends: root-SBL, on-grid SBL, MUSIC, and spectrum peak picking."""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from rootsbl.array_model import ArrayGeometry, build_dictionary
from rootsbl.errors import ContractError
from rootsbl.grid_refine import uniform_grid
from rootsbl.sbl_core import EmConfig, run_em

MUSIC_RESOLUTION = 0.01


@dataclass(frozen=True)
class EstimatorConfig:
    """Estimator settings.

    ``source_count=None`` means the number of sources is unknown; the
    refinement active-set size then defaults to ``M``. ``em.eta`` is
    overridden by ``eta`` when given, otherwise by that default.
    """

    geometry: ArrayGeometry
    grid_interval: float = 4.0
    source_count: int | None = None
    em: EmConfig = field(default_factory=EmConfig)
    eta: int | None = None

    def __post_init__(self):
        if not 0.0 < self.grid_interval <= 30.0:
            raise ContractError(f"grid_interval must lie in (0, 30], got {self.grid_interval}")
        K = self.source_count
        if K is not None and not 1 <= K < self.geometry.M:
            raise ContractError(f"source_count must lie in [1, M), got {K}")

    @property
    def active_count(self) -> int:
        if self.eta is not None:
            return self.eta
        return self.source_count if self.source_count is not None else self.geometry.M


@dataclass
class EstimationResult:
    doas: np.ndarray
    spectrum: np.ndarray
    angles: np.ndarray
    iterations: int
    elapsed: float


def pick_peaks(spectrum, angles, K: int) -> np.ndarray:
    """Angles of the ``K`` largest local maxima of ``spectrum``, ascending.

    A plateau counts once, at its lowest index. If fewer than ``K`` local
    maxima exist, the remaining slots take the largest values not adjacent to
    an already chosen index (and, failing that, any remaining index).
    """
    s = np.asarray(spectrum, dtype=float)
    angles = np.asarray(angles, dtype=float)
    n = s.size
    if angles.size != n:
        raise ContractError("spectrum and angles differ in length")
    if not 1 <= K <= n:
        raise ContractError(f"K must lie in [1, {n}], got {K}")
    left = np.r_[True, s[1:] > s[:-1]]
    right = np.r_[s[:-1] >= s[1:], True]
    peaks = np.flatnonzero(left & right)
    peaks = peaks[np.argsort(-s[peaks], kind="stable")]
    chosen = list(peaks[:K])
    if len(chosen) < K:
        taken = np.zeros(n, dtype=bool)
        taken[chosen] = True
        order = np.argsort(-s, kind="stable")
        for strict in (True, False):
            for idx in order:
                if len(chosen) == K:
                    break
                if taken[idx]:
                    continue
                if strict and any(abs(int(idx) - int(c)) <= 1 for c in chosen):
                    continue
                chosen.append(idx)
                taken[idx] = True
    return np.sort(angles[np.asarray(chosen, dtype=int)])


def _sbl_estimate(Y, cfg: EstimatorConfig, refine: bool) -> EstimationResult:
    Y = getattr(Y, "entries", Y)
    if Y.shape[0] != cfg.geometry.M:
        raise ContractError(f"Y has {Y.shape[0]} rows, geometry has {cfg.geometry.M} sensors")
    if cfg.source_count is None:
        raise ContractError("source_count is required to extract DOAs")
    start = time.perf_counter()
    # The rho and Gamma priors carry an absolute scale; running on unit-power
    # data makes the DOAs invariant to the overall level of Y.
    power = float(np.mean(np.abs(Y) ** 2))
    if not power > 0.0:
        raise ContractError("snapshot matrix is identically zero")
    grid = uniform_grid(cfg.geometry, cfg.grid_interval)
    em_cfg = replace(cfg.em, eta=min(cfg.active_count, len(grid)), refinement_enabled=refine)
    res = run_em(Y / np.sqrt(power), grid, em_cfg)
    doas = pick_peaks(res.hyperparams.delta, res.grid.angles, cfg.source_count)
    elapsed = time.perf_counter() - start
    return EstimationResult(doas, power * res.hyperparams.delta, res.grid.angles, res.iterations, elapsed)


def root_sbl_estimate(Y, cfg: EstimatorConfig) -> EstimationResult:
    """Root-SBL: EM over a coarse uniform grid whose active points are refined by rooting."""
    return _sbl_estimate(Y, cfg, refine=cfg.em.refinement_enabled)


def ongrid_sbl_estimate(Y, cfg: EstimatorConfig) -> EstimationResult:
    """The same EM with refinement switched off; DOAs stay on the original grid."""
    return _sbl_estimate(Y, cfg, refine=False)


_MUSIC_CACHE: dict = {}


def _music_dictionary(geometry: ArrayGeometry):
    key = (geometry.M, geometry.spacing_ratio)
    if key not in _MUSIC_CACHE:
        n = int(round(180.0 / MUSIC_RESOLUTION)) + 1
        angles = np.linspace(-90.0, 90.0, n)
        _MUSIC_CACHE[key] = (angles, build_dictionary(geometry, angles))
    return _MUSIC_CACHE[key]


def music_estimate(Y, cfg: EstimatorConfig) -> EstimationResult:
    """MUSIC pseudo-spectrum on a 0.01 degree grid, then :func:`pick_peaks`."""
    Y = getattr(Y, "entries", Y)
    K = cfg.source_count
    if K is None:
        raise ContractError("MUSIC requires a known source count")
    M, T = Y.shape
    if M != cfg.geometry.M:
        raise ContractError(f"Y has {M} rows, geometry has {cfg.geometry.M} sensors")
    start = time.perf_counter()
    angles, A = _music_dictionary(cfg.geometry)
    R = Y @ Y.conj().T / T
    _, V = np.linalg.eigh(R)
    En = V[:, : M - K]
    proj = En.conj().T @ A
    spectrum = 1.0 / np.maximum(np.sum(np.abs(proj) ** 2, axis=0), np.finfo(float).tiny)
    doas = pick_peaks(spectrum, angles, K)
    elapsed = time.perf_counter() - start
    return EstimationResult(doas, spectrum, angles, 0, elapsed)


ESTIMATORS = {
    "root-sbl": root_sbl_estimate,
    "ongrid-sbl": ongrid_sbl_estimate,
    "music": music_estimate,
}
