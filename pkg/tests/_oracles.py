"""Independent reference computations used by the tests.

Nothing here goes through the Toeplitz/B-spline route of the package: the
quadratic forms are integrated cell pair by cell pair over a box.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate

_QX, _QW = np.polynomial.legendre.leggauss(24)


def pl_eval(nodes_full, vals_full, x):
    return np.interp(x, nodes_full, vals_full, left=0.0, right=0.0)


def _pair(x0, x1, y0, y1, F, depth):
    # tensor Gauss on [x0,x1]x[y0,y1]; graded split toward a shared corner
    touching = abs(x1 - y0) < 1e-14 or abs(y1 - x0) < 1e-14
    if touching and depth > 0:
        total = 0.0
        xm, ym = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
        for a0, a1 in ((x0, xm), (xm, x1)):
            for b0, b1 in ((y0, ym), (ym, y1)):
                total += _pair(a0, a1, b0, b1, F, depth - 1)
        return total
    xs = 0.5 * (x0 + x1) + 0.5 * (x1 - x0) * _QX
    ys = 0.5 * (y0 + y1) + 0.5 * (y1 - y0) * _QX
    w = 0.25 * (x1 - x0) * (y1 - y0) * np.outer(_QW, _QW)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    return float(np.sum(w * F(X, Y)))


def double_form(breaks, u_of, slope_of, expo, depth=8):
    """``iint_{box^2} (u(x)-u(y))^2 |x-y|^{-1-expo}`` over the cells given by
    ``breaks``, with ``u`` linear on every cell.

    Diagonal cells are integrated exactly: with slope ``m`` on a cell of length
    ``L`` the integral is ``2 m^2 L^{3-expo} / ((2-expo)(3-expo))``.
    """
    F = lambda X, Y: (u_of(X) - u_of(Y)) ** 2 * np.abs(X - Y) ** (-1.0 - expo)  # noqa: E731
    total = 0.0
    cells = list(zip(breaks[:-1], breaks[1:]))
    for i, (x0, x1) in enumerate(cells):
        L = x1 - x0
        m = slope_of(0.5 * (x0 + x1))
        total += 2 * m * m * L ** (3 - expo) / ((2 - expo) * (3 - expo))
        for j in range(i + 1, len(cells)):
            y0, y1 = cells[j]
            total += 2.0 * _pair(x0, x1, y0, y1, F, depth if j == i + 1 else 0)
    return total


def _pl_data(grid, values):
    xf = np.concatenate([[grid.a], grid.nodes, [grid.b]])
    vf = np.concatenate([[0.0], values, [0.0]])
    u_of = lambda x: pl_eval(xf, vf, x)  # noqa: E731
    slopes = np.diff(vf) / np.diff(xf)

    def slope_of(x):
        if x <= grid.a or x >= grid.b:
            return 0.0
        return float(slopes[min(int((x - grid.a) / grid.h), grid.n)])

    return xf, u_of, slope_of


def _lumpless_mass(grid, u_of, weight):
    # int_Omega weight(x) u(x)^2 dx, element by element with adaptive quad
    xf = np.concatenate([[grid.a], grid.nodes, [grid.b]])
    tot = 0.0
    for x0, x1 in zip(xf[:-1], xf[1:]):
        tot += integrate.quad(lambda x: weight(x) * u_of(x) ** 2, x0, x1,
                              epsabs=1e-14, epsrel=1e-12, limit=200)[0]
    return tot


def fractional_form(grid, values, s, pad=5.0):
    """``(c/2) iint_{R^2} (u(x)-u(y))^2 |x-y|^{-1-2s}`` for the hat interpolant:
    box ``[a-pad, b+pad]^2`` by cell pairs, plus the exact remainder where one
    variable leaves the box."""
    from mpmath import gamma as mgamma, pi as mpi

    c = float(s * (1 - s) * mgamma(0.5 + s) * 4**s / (mgamma(2 - s) * mpi**0.5))
    xf, u_of, slope_of = _pl_data(grid, values)
    left = grid.a - (grid.a - (grid.a - pad)) * np.geomspace(1.0, 1e-4, 24)
    right = grid.b + pad * np.geomspace(1e-4, 1.0, 24)
    breaks = np.concatenate([[grid.a - pad], left[1:], xf[1:-1], right])
    breaks = np.unique(np.concatenate([breaks, [grid.a, grid.b]]))
    inner = double_form(breaks, u_of, slope_of, 2 * s)
    lo, hi = grid.a - pad, grid.b + pad
    tail = _lumpless_mass(grid, u_of,
                          lambda x: ((x - lo) ** (-2 * s) + (hi - x) ** (-2 * s)) / (2 * s))
    return 0.5 * c * inner + c * tail


def log_form(grid, values):
    """``(1/2) iint_{Omega^2} (u(x)-u(y))^2/|x-y| + int (h_Omega + rho_1) u^2``
    with ``h_Omega`` integrated from its defining set differences by quad."""
    xf, u_of, slope_of = _pl_data(grid, values)
    inner = double_form(xf, u_of, slope_of, 0.0)
    rho = -2.0 * float(np.euler_gamma)

    def h_om(x):
        return h_omega_quad(x, grid.a, grid.b)

    pot = _lumpless_mass(grid, u_of, lambda x: h_om(x) + rho)
    return 0.5 * inner + pot


def h_omega_quad(x, a, b):
    """``int_{B_1(x) \\ Omega} - int_{Omega \\ B_1(x)}`` of ``|x-y|^{-1}`` by
    adaptive quadrature on each piece."""
    f = lambda y: 1.0 / abs(x - y)  # noqa: E731
    q = lambda lo, hi: integrate.quad(f, lo, hi, epsabs=1e-14, epsrel=1e-13)[0] \
        if hi > lo else 0.0  # noqa: E731
    ball_out = q(x - 1, min(a, x + 1)) + q(max(b, x - 1), x + 1)
    omega_out = q(a, min(b, x - 1)) + q(max(a, x + 1), b)
    return ball_out - omega_out


def mp_digamma(x):
    from mpmath import digamma, mp

    with mp.workdps(30):
        return float(digamma(x))


def mp_frac_constant(N, s):
    from mpmath import gamma, mp, mpf, pi

    with mp.workdps(30):
        s = mpf(s)
        return float(s * (1 - s) * gamma(mpf(N) / 2 + s) * 4**s
                     / (gamma(2 - s) * pi ** (mpf(N) / 2)))


def central_gradient(f, u, step=1e-6):
    g = np.empty_like(u)
    for i in range(u.size):
        e = np.zeros_like(u)
        e[i] = step
        g[i] = (f(u + e) - f(u - e)) / (2 * step)
    return g


def richardson(values, ratio=2.0, order=1.0):
    """One Richardson step on the last two of ``values`` (successive halvings of h)."""
    v1, v2 = values[-2], values[-1]
    f = ratio**order
    return (f * v2 - v1) / (f - 1.0)


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


__all__ = ["fractional_form", "log_form", "h_omega_quad", "mp_digamma", "mp_frac_constant",
           "central_gradient", "richardson", "rel", "math"]
