"""Kernel integrals for the hat basis on a uniform 1-D grid.

Two families of integrals are needed.

* Tail integrals ``int_I |x - y|^{-1-e} dy`` over intervals ``I`` that do not
  contain ``x``. They have elementary antiderivatives in the distance
  ``d = |x - y|`` (``e = 2s`` for the fractional kernel, ``e = 0`` for the
  logarithmic one) and are collected in :class:`KernelTail`.

* Full-space Galerkin entries ``a(phi_0, phi_k)`` of the translation invariant
  forms. On a uniform grid they only depend on ``k``, so each operator is a
  Toeplitz matrix plus a boundary correction. With the cubic B-spline
  ``M4 = hat * hat`` they reduce to one-dimensional integrals
  ``int M4(t) kernel(k + t) dt``. Near the diagonal these are evaluated through
  a fourth difference of an antiderivative of order four of the kernel, far
  from it by Gauss-Legendre panels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import SmallOrderError

# central fourth difference
FOURTH_DIFF = np.array([1.0, -4.0, 6.0, -4.0, 1.0])
NEAR_OFFSET = 2
GAUSS_ORDER = 8
PANEL_TOL = 1e-10
MAX_DEPTH = 30

_GL_X, _GL_W = np.polynomial.legendre.leggauss(GAUSS_ORDER)


class QuadratureError(SmallOrderError):
    pass


@dataclass(frozen=True)
class KernelTail:
    """Closed-form integrals of ``|x - y|^{-1-exponent}`` away from ``x``.

    ``exponent = 0`` is the logarithmic kernel ``1/|x-y|``.
    """

    exponent: float

    def antiderivative(self, d):
        """``F`` with ``F'(d) = d^{-1-exponent}``, for distances ``d > 0``."""
        d = np.asarray(d, dtype=float)
        e = self.exponent
        if e == 0.0:
            return np.log(d)
        with np.errstate(divide="ignore"):
            return -(d ** (-e)) / e

    def between(self, d1, d2):
        """``int_{d1}^{d2} d^{-1-exponent} dd`` for ``0 < d1 <= d2 <= inf``."""
        d1 = np.asarray(d1, dtype=float)
        d2 = np.asarray(d2, dtype=float)
        e = self.exponent
        if e == 0.0:
            return np.log(d2) - np.log(d1)
        with np.errstate(divide="ignore"):
            return (d1 ** (-e) - d2 ** (-e)) / e

    def integral(self, x: float, lo: float, hi: float) -> float:
        """``int_lo^hi |x - y|^{-1-exponent} dy`` for ``x`` outside ``(lo, hi)``.

        Infinite endpoints are allowed. Empty intervals give 0.
        """
        if hi <= lo:
            return 0.0
        if lo < x < hi:
            raise ValueError(f"x={x} lies inside ({lo}, {hi})")
        if x <= lo:
            d1, d2 = lo - x, hi - x
        else:
            d1, d2 = x - hi, x - lo
        if d1 <= 0.0:
            return math.inf
        return float(self.between(d1, d2))


def bspline4(t):
    """Centered cubic B-spline on ``[-2, 2]``, equal to the self-convolution of
    the unit hat."""
    t = np.abs(np.asarray(t, dtype=float))
    inner = 2.0 / 3.0 - t**2 + 0.5 * t**3
    outer = (2.0 - t) ** 3 / 6.0
    return np.where(t < 1.0, inner, np.where(t < 2.0, outer, 0.0))


def _relative_power(eps: float, log_j):
    # (j^eps - 1)/eps, continuous through eps = 0
    if eps == 0.0:
        return log_j
    return np.expm1(eps * log_j) / eps


def frac_fourth_antiderivative(j, s: float):
    """Fourth antiderivative of ``|z|^{-1-2s}`` at integer points, modulo cubics.

    ``|z|^{3-2s} / ((-2s)(1-2s)(2-2s)(3-2s))`` minus the quadratic
    ``z^2 / (same)``; the subtraction keeps ``s = 1/2`` (where the kernel's
    antiderivative turns logarithmic) finite and well conditioned.
    """
    j = np.abs(np.asarray(j, dtype=float))
    safe = np.where(j > 0, j, 1.0)
    rel = _relative_power(1.0 - 2.0 * s, np.log(safe))
    val = safe**2 * rel / (-2.0 * s * (2.0 - 2.0 * s) * (3.0 - 2.0 * s))
    return np.where(j > 0, val, 0.0)


def log_fourth_antiderivative(j):
    """Fourth antiderivative of the finite-part ``|z|^{-1}`` normalized at the
    unit ball, without the cubic term: ``|z|^3 ln|z| / 6``."""
    j = np.abs(np.asarray(j, dtype=float))
    safe = np.where(j > 0, j, 1.0)
    return np.where(j > 0, safe**3 * np.log(safe) / 6.0, 0.0)


def _near_sum(k: int, G) -> float:
    return float(np.dot(FOURTH_DIFF, G(k + np.arange(-2, 3))))


def _gauss_panel(f, lo, hi):
    x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * _GL_X
    return 0.5 * (hi - lo) * np.dot(_GL_W, f(x))


def _adaptive(f, lo, hi, depth=0):
    whole = _gauss_panel(f, lo, hi)
    mid = 0.5 * (lo + hi)
    split = _gauss_panel(f, lo, mid) + _gauss_panel(f, mid, hi)
    if abs(whole - split) <= PANEL_TOL * max(abs(split), 1e-300):
        return split
    if depth >= MAX_DEPTH:
        raise QuadratureError(
            f"panel [{lo}, {hi}] did not converge within {MAX_DEPTH} refinements")
    return _adaptive(f, lo, mid, depth + 1) + _adaptive(f, mid, hi, depth + 1)


def spline_moments(ks, kernel) -> np.ndarray:
    """``int_{-2}^{2} M4(t) kernel(k + t) dt`` for each ``k >= 3``.

    Four Gauss panels per entry, vectorized over ``k``; entries whose panels
    disagree with their split halves are refined adaptively.
    """
    ks = np.asarray(ks, dtype=float)
    if ks.size == 0:
        return np.zeros(0)
    if np.any(ks <= 2):
        raise ValueError("far-field moments need k >= 3")
    total = np.zeros_like(ks)
    for lo in (-2.0, -1.0, 0.0, 1.0):
        hi = lo + 1.0
        mid = lo + 0.5
        x_whole = 0.5 * (lo + hi) + 0.5 * _GL_X
        x_left = 0.5 * (lo + mid) + 0.25 * _GL_X
        x_right = 0.5 * (mid + hi) + 0.25 * _GL_X
        w_whole = bspline4(x_whole)
        whole = 0.5 * (kernel(ks[:, None] + x_whole) * w_whole) @ _GL_W
        split = 0.25 * ((kernel(ks[:, None] + x_left) * bspline4(x_left)) @ _GL_W
                        + (kernel(ks[:, None] + x_right) * bspline4(x_right)) @ _GL_W)
        bad = np.abs(whole - split) > PANEL_TOL * np.abs(split)
        for i in np.flatnonzero(bad):
            k = ks[i]
            split[i] = _adaptive(lambda t: bspline4(t) * kernel(k + t), lo, hi)
        total += split
    return total


def frac_toeplitz_unit(n: int, s: float, near: int = NEAR_OFFSET) -> np.ndarray:
    """Unit-spacing generator ``g`` of the full-space fractional stiffness.

    The entries on a grid of spacing ``h`` are ``-c_{1,s} h^{1-2s} g[k]``.
    """
    g = np.empty(n)
    m = min(n, near + 1)
    G = lambda j: frac_fourth_antiderivative(j, s)  # noqa: E731
    for k in range(m):
        g[k] = _near_sum(k, G)
    if n > m:
        g[m:] = spline_moments(np.arange(m, n), lambda z: z ** (-1.0 - 2.0 * s))
    return g


def log_toeplitz_unit(n: int, near: int = NEAR_OFFSET) -> np.ndarray:
    """Unit-spacing generator ``g`` of the finite-part ``|z|^{-1}`` pairing
    ``<Pf_1 |z|^{-1}, B_k>`` divided by ``h``; scale-dependent terms are added
    by the caller."""
    g = np.empty(n)
    m = min(n, near + 1)
    for k in range(m):
        g[k] = _near_sum(k, log_fourth_antiderivative)
    if n > m:
        g[m:] = spline_moments(np.arange(m, n), lambda z: 1.0 / z)
    return g


def consistent_mass_unit(n: int) -> np.ndarray:
    """Toeplitz generator of the P1 mass matrix on unit spacing."""
    m = np.zeros(n)
    m[0] = 2.0 / 3.0
    if n > 1:
        m[1] = 1.0 / 6.0
    return m
