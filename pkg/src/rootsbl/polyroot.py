"""Roots of low-degree complex polynomials via the balanced companion matrix."""

from __future__ import annotations

import numpy as np
from scipy.linalg import eigvals
from scipy.linalg.lapack import zgebal

from rootsbl.errors import DegenerateError

TRIM_THRESHOLD = 1e-14


def trim_leading(coeffs) -> np.ndarray:
    """Drop leading coefficients below ``TRIM_THRESHOLD * max|coeff|``."""
    c = np.atleast_1d(np.asarray(coeffs, dtype=complex))
    scale = np.max(np.abs(c)) if c.size else 0.0
    if scale == 0.0:
        return c[:0]
    keep = np.flatnonzero(np.abs(c) > TRIM_THRESHOLD * scale)
    return c[keep[0]:]


def companion(coeffs) -> np.ndarray:
    """Companion matrix (first-row form) of the monic normalization of ``coeffs``.

    ``coeffs`` are in descending powers with a nonzero leading entry.
    """
    c = np.asarray(coeffs, dtype=complex)
    n = c.size - 1
    C = np.zeros((n, n), dtype=complex)
    C[0, :] = -c[1:] / c[0]
    C[np.arange(1, n), np.arange(n - 1)] = 1.0
    return C


def find_roots(coeffs) -> np.ndarray:
    """Return all roots (with multiplicity) of a polynomial in descending powers.

    Parameters
    ----------
    coeffs : array_like of complex
        Coefficients, highest power first. Leading entries that are
        negligible relative to the largest coefficient are trimmed.

    Returns
    -------
    numpy.ndarray
        Complex roots, one per degree of the trimmed polynomial.

    Raises
    ------
    DegenerateError
        If the trimmed polynomial has degree 0 (or is identically zero).
    """
    c = trim_leading(coeffs)
    if c.size < 2:
        raise DegenerateError("polynomial has degree 0 after trimming")
    # power-of-two scaling is exact and cannot overflow for subnormal input
    _, exp = np.frexp(np.max(np.abs(c)))
    c = np.ldexp(c.real, -exp) + 1j * np.ldexp(c.imag, -exp)
    if c.size == 2:
        return np.array([-c[1] / c[0]])
    balanced, _, _, _, info = zgebal(companion(c), scale=1, permute=0)
    if info != 0:
        raise DegenerateError(f"balancing failed (info={info})")
    return eigvals(balanced, overwrite_a=True, check_finite=False)


def polyval(coeffs, z):
    """Horner evaluation, descending powers."""
    out = np.zeros_like(np.asarray(z, dtype=complex))
    for c in np.asarray(coeffs, dtype=complex):
        out = out * z + c
    return out


def relative_residual(coeffs, z) -> np.ndarray:
    """``|p(z)| / (max|coeff| * max(1, |z|)**degree)`` for each root ``z``."""
    c = np.asarray(coeffs, dtype=complex)
    deg = c.size - 1
    z = np.asarray(z, dtype=complex)
    return np.abs(polyval(c, z)) / (np.max(np.abs(c)) * np.maximum(1.0, np.abs(z)) ** deg)
