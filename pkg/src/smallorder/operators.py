"""Galerkin matrices of the fractional and logarithmic Dirichlet forms.

Both forms split into a nonlocal difference part over ``Omega x Omega`` and a
zero-order potential:

    E_s(u, u) = c_{1,s}/2 iint_{Omega^2} (u(x)-u(y))^2 |x-y|^{-1-2s}
                + int_Omega kappa_s u^2,
    E_L(u, u) = c_1/2 iint_{Omega^2} (u(x)-u(y))^2 |x-y|^{-1}
                + int_Omega (h_Omega + rho_1) u^2,

with ``kappa_s(x) = c_{1,s} int_{R \\ Omega} |x-y|^{-1-2s} dy``. Since hat
functions vanish outside ``Omega`` the sum of both parts equals the full-space
form, which on a uniform grid is a Toeplitz matrix ``T`` computed exactly in
:mod:`.kernels`. Then

    K_L = T_L                      (exact: u^T K_L u = E_L(I_h u, I_h u)),
    K_s = T_s + (h I - M),         M the consistent P1 mass.

``T_s`` tends to ``M`` as ``s -> 0``, so the constant correction makes
``K_0 = h I`` match the lumped mass used everywhere else and gives
``K_s = h I + s K_L + O(s^2)`` entrywise. The correction is positive
semidefinite and of size ``O(h^2) |u'|_2^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.linalg import toeplitz

from .core import (
    DimensionMismatchError,
    Grid1D,
    GridFunction,
    ParameterRangeError,
    _values,
    frac_constant,
    log_constants,
)
from .kernels import (
    KernelTail,
    consistent_mass_unit,
    frac_toeplitz_unit,
    log_toeplitz_unit,
)

FRACTIONAL = "fractional"
LOGARITHMIC = "logarithmic"



@dataclass(frozen=True)
class OperatorMatrix:
    kind: str
    grid: Grid1D
    entries: np.ndarray
    s: float | None = None

    def __post_init__(self):
        self.entries.setflags(write=False)

    @property
    def n(self) -> int:
        return self.grid.n

    def apply(self, u) -> np.ndarray:
        return self.entries @ _values(u, self.grid)

    def to_csv(self, path) -> Path:
        from .io import write_matrix_csv

        return write_matrix_csv(path, self)


def _check_s(s: float, upper: float = 1.0):
    if not 0.0 < s < upper:
        raise ParameterRangeError(f"s must lie in (0, {upper}), got {s}")


def exterior_potential(x, grid: Grid1D, s: float):
    """``kappa_s(x) = c_{1,s} int_{R \\ Omega} |x-y|^{-1-2s} dy``."""
    x = np.asarray(x, dtype=float)
    c = frac_constant(1, s)
    return c * ((x - grid.a) ** (-2 * s) + (grid.b - x) ** (-2 * s)) / (2 * s)


def h_omega(x: float, grid: Grid1D) -> float:
    """Geometric potential of the logarithmic form at ``x`` in ``Omega``.

    ``c_1 (int_{B_1(x) \\ Omega} - int_{Omega \\ B_1(x)}) |x-y|^{-1} dy``, with the
    unit ball intersected exactly against the interval.
    """
    if not grid.a < x < grid.b:
        raise ParameterRangeError(f"x={x} is outside ({grid.a}, {grid.b})")
    c1, _ = log_constants(1)
    tail = KernelTail(0.0)
    lo, hi = x - 1.0, x + 1.0
    ball_out = (tail.integral(x, lo, min(grid.a, x)) if lo < grid.a else 0.0) + \
               (tail.integral(x, max(grid.b, x), hi) if hi > grid.b else 0.0)
    omega_out = (tail.integral(x, grid.a, lo) if grid.a < lo else 0.0) + \
                (tail.integral(x, hi, grid.b) if hi < grid.b else 0.0)
    return c1 * (ball_out - omega_out)


def log_potential(x, grid: Grid1D):
    """``h_Omega(x) + rho_1`` vectorized; in one dimension ``h_Omega`` collapses
    to ``-c_1 ln((x-a)(b-x))``."""
    c1, rho = log_constants(1)
    x = np.asarray(x, dtype=float)
    return -c1 * (np.log(x - grid.a) + np.log(grid.b - x)) + rho


@lru_cache(maxsize=64)
def _mass_correction(grid: Grid1D) -> np.ndarray:
    # h I - M with M the consistent P1 mass; positive semidefinite
    return grid.h * (np.eye(grid.n) - toeplitz(consistent_mass_unit(grid.n)))


@lru_cache(maxsize=64)
def _fractional_entries(grid: Grid1D, s: float) -> np.ndarray:
    h = grid.h
    c = frac_constant(1, s)
    T = toeplitz(-c * h ** (1 - 2 * s) * frac_toeplitz_unit(grid.n, s))
    return T + _mass_correction(grid)


@lru_cache(maxsize=64)
def _log_entries(grid: Grid1D) -> np.ndarray:
    n, h = grid.n, grid.h
    c1, rho = log_constants(1)
    m = consistent_mass_unit(n)
    col = h * (-c1 * log_toeplitz_unit(n) - 2 * c1 * (math.log(h) - 11.0 / 6.0) * m + rho * m)
    return toeplitz(col)


def assemble_fractional(grid: Grid1D, s: float) -> OperatorMatrix:
    """Stiffness matrix ``K_s`` of the fractional Dirichlet form on ``grid``."""
    _check_s(s)
    return OperatorMatrix(FRACTIONAL, grid, _fractional_entries(grid, float(s)).copy(), float(s))


def assemble_log(grid: Grid1D) -> OperatorMatrix:
    """Matrix ``K_L`` of the logarithmic Laplacian's quadratic form on ``grid``."""
    return OperatorMatrix(LOGARITHMIC, grid, _log_entries(grid).copy())


def qform(K: OperatorMatrix, u) -> float:
    v = _values(u, K.grid)
    if v.shape != (K.n,):
        raise DimensionMismatchError(f"vector of length {v.size} vs matrix of size {K.n}")
    return float(v @ K.entries @ v)


def small_order_residual(phi, s: float, K_L: OperatorMatrix | None = None) -> float:
    """Discrete sup of ``((-Delta)^s phi - phi)/s - L_Delta phi`` away from the
    boundary (nodes at distance >= 4h from ``a`` and ``b``)."""
    _check_s(s, 0.25)
    if not isinstance(phi, GridFunction):
        raise TypeError("phi must be a GridFunction")
    grid = phi.grid
    K_s = assemble_fractional(grid, s)
    if K_L is None:
        K_L = assemble_log(grid)
    v = phi.values
    r = ((K_s.apply(v) / grid.h - v) / s) - K_L.apply(v) / grid.h
    x = grid.nodes
    keep = (x - grid.a >= 4 * grid.h - 1e-12) & (grid.b - x >= 4 * grid.h - 1e-12)
    return float(np.max(np.abs(r[keep]), initial=0.0))
