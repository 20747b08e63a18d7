"""
Grid refinement by polynomial rooting
=====================================

Each active grid point is moved to the stationary point, in the phase
variable ``v``, of the expected data misfit

    sum_t ||y_t - A mu_t||^2 + T tr(A Sigma A^H)

with every other dictionary column held fixed. Setting the derivative with
respect to ``conj(v)`` to zero and restricting ``v`` to the unit circle gives a
polynomial of degree ``M - 1``; the root nearest the unit circle is mapped
back to an angle and accepted only if it stays inside the half-spacing window
around the current point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from rootsbl.array_model import ArrayGeometry, build_dictionary, steering_vector
from rootsbl.errors import ContractError, DegenerateError
from rootsbl.polyroot import find_roots

ROOT_TIE_TOL = 1e-9


class Grid:
    """Mutable angle grid (degrees) with a cached steering dictionary.

    Parameters
    ----------
    geometry : ArrayGeometry
    angles : array_like
        Strictly increasing angles in [-90, 90].
    spacing : float, optional
        Original spacing ``r`` of the uniform grid this one started from.
    """

    def __init__(self, geometry: ArrayGeometry, angles, spacing: float | None = None):
        self.geometry = geometry
        self.angles = np.array(angles, dtype=float)
        self.dictionary = build_dictionary(geometry, self.angles)
        if spacing is None:
            spacing = float(np.min(np.diff(self.angles))) if self.angles.size > 1 else 180.0
        self.spacing = float(spacing)

    def __len__(self):
        return self.angles.size

    def copy(self) -> "Grid":
        g = Grid.__new__(Grid)
        g.geometry = self.geometry
        g.angles = self.angles.copy()
        g.dictionary = self.dictionary.copy()
        g.spacing = self.spacing
        return g

    def window(self, i: int) -> tuple[float, float]:
        """Acceptance interval: midpoints to the neighbours, clamped to [-90, 90] at the ends."""
        th = self.angles
        lo = -90.0 if i == 0 else 0.5 * (th[i - 1] + th[i])
        hi = 90.0 if i == th.size - 1 else 0.5 * (th[i] + th[i + 1])
        return lo, hi

    def set_angle(self, i: int, theta: float) -> None:
        lo, hi = self.window(i)
        if not lo <= theta <= hi:
            raise ContractError(f"angle {theta} outside window [{lo}, {hi}] of grid point {i}")
        self.angles[i] = theta
        self.dictionary[:, i] = steering_vector(self.geometry, theta)
        assert np.all(np.diff(self.angles) > 0), "grid lost strict monotonicity"


def uniform_grid(geometry: ArrayGeometry, spacing: float) -> Grid:
    """Grid ``-90, -90 + r, ...`` up to the last point not exceeding 90 degrees."""
    if not 0.0 < spacing <= 180.0:
        raise ContractError(f"grid spacing must lie in (0, 180], got {spacing}")
    n = int(np.floor(180.0 / spacing + 1e-9)) + 1
    angles = -90.0 + spacing * np.arange(n)
    angles[-1] = min(angles[-1], 90.0)
    return Grid(geometry, angles, spacing)


@dataclass
class RefinementTerms:
    """Scalar ``phi`` and vector ``phi_vec`` of the per-point stationarity condition."""

    phi: float
    phi_vec: np.ndarray


def select_active(post, eta: int, delta=None, delta_min: float = 0.0) -> np.ndarray:
    """Indices of the ``eta`` largest posterior-mean row norms, largest first.

    Components whose variance sits at the floor ``delta_min`` are skipped.
    Ties go to the lower index.
    """
    mu = post.mu
    if not 1 <= eta <= mu.shape[0]:
        raise ContractError(f"eta must lie in [1, {mu.shape[0]}], got {eta}")
    f = np.linalg.norm(mu, axis=1)
    order = np.argsort(-f, kind="stable")
    if delta is not None:
        alive = np.asarray(delta) > delta_min
        order = order[alive[order]]
    return order[:eta]


def compute_refinement_terms(i: int, Y, grid: Grid, post) -> RefinementTerms:
    Y = getattr(Y, "entries", Y)
    A = grid.dictionary
    mu, Sigma = post.mu, post.sigma
    T = Y.shape[1]
    a_i = A[:, i]
    mu_i = mu[i]
    phi = float(np.sum(np.abs(mu_i) ** 2) + T * Sigma[i, i].real)
    # T * sum_{j != i} Sigma_ji a_j
    cross = T * (A @ Sigma[:, i] - Sigma[i, i] * a_i)
    # residual with component i added back: y_t - sum_{j != i} mu_tj a_j
    resid_i = Y - A @ mu + np.outer(a_i, mu_i)
    phi_vec = cross - resid_i @ mu_i.conj()
    return RefinementTerms(phi, phi_vec)


def build_polynomial(terms: RefinementTerms, M: int) -> np.ndarray:
    """Descending-power coefficients of the degree ``M - 1`` refinement polynomial.

    Leading coefficient ``M(M-1)/2 * phi``; the coefficient of ``v**(M-1-m)``
    is ``m * phi_vec[m]`` (zero-based) for ``m = 1 .. M-1``.
    """
    if M < 2:
        raise ContractError("M must be >= 2")
    if not terms.phi > 0.0:
        raise DegenerateError(f"refinement polynomial has zero leading coefficient (phi={terms.phi})")
    coeffs = np.empty(M, dtype=complex)
    coeffs[0] = 0.5 * M * (M - 1) * terms.phi
    coeffs[1:] = np.arange(1, M) * np.asarray(terms.phi_vec)[1:M]
    return coeffs


def refine_point(i: int, grid: Grid, roots) -> float | None:
    """Map the root nearest the unit circle to an angle; ``None`` if rejected.

    Roots tied (within ``ROOT_TIE_TOL``) in distance to the unit circle are
    resolved by the mapped angle nearest the current grid point. Rejection
    happens when the arcsin argument leaves [-1, 1] or the candidate falls
    outside :meth:`Grid.window`. The grid itself is not modified.
    """
    roots = np.atleast_1d(np.asarray(roots, dtype=complex))
    if roots.size == 0:
        raise ContractError("no roots supplied")
    dist = np.abs(np.abs(roots) - 1.0)
    tied = roots[dist <= dist.min() + ROOT_TIE_TOL]
    cand = grid.geometry.angle_from_phase(tied)
    if tied.size > 1:
        gap = np.where(np.isnan(cand), np.inf, np.abs(cand - grid.angles[i]))
        theta = cand[int(np.argmin(gap))]
    else:
        theta = cand[0]
    if np.isnan(theta):
        return None
    lo, hi = grid.window(i)
    if lo <= theta <= hi:
        return float(theta)
    return None


def refinement_pass(Y, grid: Grid, post, eta: int, delta=None, delta_min: float = 0.0) -> int:
    """Sequentially refine the active points in place; returns the number accepted.

    A point's dictionary column is updated as soon as it is accepted, so later
    points in the same pass see it.
    """
    M = grid.geometry.M
    accepted = 0
    for i in select_active(post, eta, delta, delta_min):
        terms = compute_refinement_terms(i, Y, grid, post)
        try:
            roots = find_roots(build_polynomial(terms, M))
        except DegenerateError:
            continue
        theta = refine_point(i, grid, roots)
        if theta is not None:
            grid.set_angle(i, theta)
            accepted += 1
    return accepted
