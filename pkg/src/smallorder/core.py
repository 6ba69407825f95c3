"""Grids, nodal functions, discrete norms and the explicit constants.

All geometry is one-dimensional: an interval ``(a, b)`` carrying ``n`` uniformly
spaced interior nodes. Functions are identified with their piecewise-linear
interpolant, which vanishes at ``a``, ``b`` and outside the interval.

Integrals of nodal functions use the lumped (rectangle) rule, so the mass
matrix is ``h * I`` project-wide.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import digamma, gamma

EULER_GAMMA = float(np.euler_gamma)


class SmallOrderError(Exception):
    """Base class for every error raised by this package."""


class InvalidDomainError(SmallOrderError):
    pass


class TooFewNodesError(SmallOrderError):
    pass


class ParameterRangeError(SmallOrderError):
    pass


class DimensionMismatchError(SmallOrderError):
    pass


@dataclass(frozen=True)
class Grid1D:
    a: float
    b: float
    n: int
    h: float = field(init=False)
    nodes: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)) or self.b <= self.a:
            raise InvalidDomainError(f"need b > a, got a={self.a}, b={self.b}")
        if self.n < 3:
            raise TooFewNodesError(f"need n >= 3 interior nodes, got n={self.n}")
        h = (self.b - self.a) / (self.n + 1)
        nodes = self.a + h * np.arange(1, self.n + 1)
        nodes.setflags(write=False)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "nodes", nodes)

    @property
    def measure(self) -> float:
        return self.b - self.a

    @property
    def diameter(self) -> float:
        return self.b - self.a

    @property
    def R(self) -> float:
        """Twice the diameter; the radius entering the explicit sup bounds."""
        return 2.0 * self.diameter

    @property
    def discrete_measure(self) -> float:
        """Lumped measure ``h * n`` of the node set."""
        return self.h * self.n

    def rescaled(self, factor: float | None = None) -> Grid1D:
        """Grid on ``Omega / factor`` with the same node count.

        The default factor is ``|Omega|``, which gives a domain of unit measure.
        """
        lam = self.measure if factor is None else float(factor)
        return Grid1D(self.a / lam, self.b / lam, self.n)

    def function(self, values) -> GridFunction:
        return GridFunction(self, values)

    def interpolate(self, f) -> GridFunction:
        return GridFunction(self, f(self.nodes))

    def constant(self, c: float) -> GridFunction:
        return GridFunction(self, np.full(self.n, float(c)))


@dataclass(frozen=True)
class GridFunction:
    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise DimensionMismatchError(
                f"expected {self.grid.n} nodal values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    # numpy scalars defer to our arithmetic instead of returning raw arrays
    __array_ufunc__ = None

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def __len__(self):
        return self.grid.n

    def __neg__(self):
        return GridFunction(self.grid, -self.values)

    def __abs__(self):
        return GridFunction(self.grid, np.abs(self.values))

    def __mul__(self, c):
        return GridFunction(self.grid, self.values * float(c))

    __rmul__ = __mul__

    def __add__(self, other):
        return GridFunction(self.grid, self.values + _values(other, self.grid))

    def __sub__(self, other):
        return GridFunction(self.grid, self.values - _values(other, self.grid))


def _values(u, grid: Grid1D | None = None) -> np.ndarray:
    if isinstance(u, GridFunction):
        if grid is not None and u.grid.n != grid.n:
            raise DimensionMismatchError(f"grid sizes differ: {u.grid.n} vs {grid.n}")
        return u.values
    if np.isscalar(u):
        return np.full(grid.n, float(u))
    return np.asarray(u, dtype=float)


@dataclass(frozen=True)
class Constants:
    N: int = 1
    gamma_EM: float = EULER_GAMMA
    c_N: float = field(init=False)
    rho_N: float = field(init=False)

    def __post_init__(self):
        c, rho = log_constants(self.N)
        object.__setattr__(self, "c_N", c)
        object.__setattr__(self, "rho_N", rho)


def make_grid(a: float, b: float, n: int) -> Grid1D:
    return Grid1D(float(a), float(b), int(n))


def frac_constant(N: int, s: float) -> float:
    """Normalization constant of the fractional Laplacian in dimension ``N``.

    ``c_{N,s} = s (1-s) Gamma(N/2 + s) 4^s / (Gamma(2-s) pi^{N/2})``.
    """
    if not 0.0 < s < 1.0:
        raise ParameterRangeError(f"s must lie in (0, 1), got {s}")
    if N < 1:
        raise ParameterRangeError(f"N must be >= 1, got {N}")
    return float(s * (1.0 - s) * gamma(N / 2 + s) * 4.0**s
                 / (gamma(2.0 - s) * math.pi ** (N / 2)))


def log_constants(N: int) -> tuple[float, float]:
    """``(c_N, rho_N)`` of the logarithmic Laplacian."""
    if N < 1:
        raise ParameterRangeError(f"N must be >= 1, got {N}")
    c_N = math.pi ** (-N / 2) * float(gamma(N / 2))
    rho_N = 2.0 * math.log(2.0) + float(digamma(N / 2)) - EULER_GAMMA
    return c_N, rho_N


def sup_bound_constant(grid: Grid1D, N: int = 1) -> float:
    """``R^2 exp(1/2 - rho_N)``, the base of every explicit sup bound."""
    _, rho = log_constants(N)
    return grid.R**2 * math.exp(0.5 - rho)


def norm_lp(u, p: float, grid: Grid1D | None = None) -> float:
    """Lumped discrete L^p norm; ``p = inf`` gives the max norm."""
    if isinstance(u, GridFunction):
        grid = u.grid
    if grid is None:
        raise TypeError("a grid is required for raw arrays")
    v = np.abs(_values(u, grid))
    if p == math.inf:
        return float(v.max(initial=0.0))
    if p < 1:
        raise ParameterRangeError(f"p must be >= 1, got {p}")
    return float((grid.h * np.sum(v**p)) ** (1.0 / p))


def lp_power(u, p: float, grid: Grid1D | None = None) -> float:
    """``h * sum |u_i|^p``, the p-th power of the lumped norm."""
    if isinstance(u, GridFunction):
        grid = u.grid
    return float(grid.h * np.sum(np.abs(_values(u, grid)) ** p))
