"""Nonlinear solvers for the sublinear, constrained, logistic and logarithmic
problems, together with energies, gradients and the convexity-path verifiers.

Every residual reported in a :class:`Solution` is scaled as
``max_i |g_i| / (h * max(1, |u|_inf))`` where ``g`` is the discrete
Euler-Lagrange residual, so it is comparable across grids.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .core import (
    Grid1D,
    GridFunction,
    ParameterRangeError,
    SmallOrderError,
    _values,
    sup_bound_constant,
)
from .io import write_csv, write_json
from .operators import OperatorMatrix, assemble_fractional, assemble_log
from .spectral import first_eigenpair

log = logging.getLogger(__name__)

STEP_TOL = 1e-10
KKT_TOL = 1e-8
DESCENT_TOL = 1e-10
MAX_FIXED_POINT = 100_000
MAX_DESCENT = 50_000
ARMIJO_C = 1e-4
ROUND_SLACK = 8 * np.finfo(float).eps


class ConvergenceError(SmallOrderError):
    pass


class PositivityError(SmallOrderError):
    pass


class ConstraintError(SmallOrderError):
    pass


class TrivialSolutionError(SmallOrderError):
    """The iteration collapsed to the zero function."""


@dataclass(frozen=True)
class ProblemParams:
    s: float | None = None
    p: float | None = None
    mu: float | None = None
    k: float | None = None
    A: float | None = None
    r: float | None = None
    eps: float | None = None

    def __post_init__(self):
        errs = self.violations()
        if errs:
            raise ParameterRangeError("; ".join(errs))

    def violations(self) -> list[str]:
        out = []
        chk = [
            ("s", lambda v: 0 < v < 1, "s in (0,1)"),
            ("mu", lambda v: v > 0, "mu>0"),
            ("k", lambda v: v > 1, "k>1"),
            ("A", lambda v: v > 0, "A>0"),
            ("r", lambda v: v > 2, "r>2"),
            ("eps", lambda v: v > 0, "eps>0"),
            ("p", lambda v: v > 1, "p>1"),
        ]
        for name, ok, label in chk:
            v = getattr(self, name)
            if v is not None and not (math.isfinite(v) and ok(v)):
                out.append(f"{label} violated: {name}={v}")
        return out

    @property
    def eta0(self) -> float:
        return 1.0 + self.A * self.eps ** ((2.0 - self.r) / 2.0)


@dataclass(frozen=True)
class Solution:
    u: GridFunction
    energy: float
    iterations: int
    kkt_residual: float
    multiplier: float | None = None
    trivial: bool = False
    monotone: bool | None = None

    def to_csv(self, path):
        return write_csv(path, ("x", "u"), zip(self.u.grid.nodes, self.u.values))

    def summary(self) -> dict:
        return {"energy": self.energy, "multiplier": self.multiplier,
                "iterations": self.iterations, "residual": self.kkt_residual,
                "trivial": self.trivial}

    def to_json(self, path):
        return write_json(path, self.summary())


def _scaled(g: np.ndarray, u: np.ndarray, h: float) -> float:
    return float(np.max(np.abs(g)) / (h * max(1.0, np.max(np.abs(u), initial=0.0))))


def _check_p_sub(p):
    if not 1.0 < p < 2.0:
        raise ParameterRangeError(f"p in (1,2) violated: p={p}")


def _matrix(K, grid, s=None):
    if K is not None:
        return K
    return assemble_fractional(grid, s) if s is not None else assemble_log(grid)


def _xlogx2(u):
    # u^2 ln(u^2) with the 0 ln 0 = 0 convention
    a = u * u
    out = np.zeros_like(a)
    nz = a > 0
    out[nz] = a[nz] * np.log(a[nz])
    return out


def _ulog(u):
    out = np.zeros_like(u)
    nz = u != 0
    out[nz] = u[nz] * np.log(np.abs(u[nz]))
    return out


# --------------------------------------------------------------------------
# energies and gradients

def energy_Js(u, s: float, p: float, K: OperatorMatrix | None = None) -> float:
    """``1/2 u^T K_s u - (1/p) h sum |u|^p``."""
    _check_p_sub(p)
    grid = u.grid if K is None else K.grid
    K = _matrix(K, grid, s)
    v = _values(u, grid)
    return float(0.5 * v @ K.entries @ v - grid.h * np.sum(np.abs(v) ** p) / p)


def grad_Js(u, s: float, p: float, K: OperatorMatrix | None = None) -> np.ndarray:
    grid = u.grid if K is None else K.grid
    K = _matrix(K, grid, s)
    v = _values(u, grid)
    return K.entries @ v - grid.h * np.abs(v) ** (p - 2) * v


def energy_J0(u, mu: float, K_L: OperatorMatrix | None = None) -> float:
    """``1/2 u^T K_L u + (mu/4) h sum u^2 (ln u^2 - 1)``."""
    if not mu > 0:
        raise ParameterRangeError(f"mu>0 violated: mu={mu}")
    grid = u.grid if K_L is None else K_L.grid
    K_L = _matrix(K_L, grid)
    v = _values(u, grid)
    return float(0.5 * v @ K_L.entries @ v
                 + 0.25 * mu * grid.h * np.sum(_xlogx2(v) - v * v))


def grad_J0(u, mu: float, K_L: OperatorMatrix | None = None) -> np.ndarray:
    grid = u.grid if K_L is None else K_L.grid
    K_L = _matrix(K_L, grid)
    v = _values(u, grid)
    return K_L.entries @ v + mu * grid.h * _ulog(v)


def theta_objective(u, K: OperatorMatrix, A: float, r: float) -> float:
    """``L(u) = 1/2 u^T K u + (A/r) h sum |u|^r``."""
    v = _values(u, K.grid)
    return float(0.5 * v @ K.entries @ v + A * K.grid.h * np.sum(np.abs(v) ** r) / r)


def grad_theta_objective(u, K: OperatorMatrix, A: float, r: float) -> np.ndarray:
    v = _values(u, K.grid)
    return K.entries @ v + A * K.grid.h * np.abs(v) ** (r - 2) * v


def logistic_energy(u, K: OperatorMatrix, A: float, r: float, eta: float) -> float:
    v = _values(u, K.grid)
    return theta_objective(v, K, A, r) - 0.5 * eta * K.grid.h * float(v @ v)


def grad_logistic_energy(u, K, A, r, eta) -> np.ndarray:
    v = _values(u, K.grid)
    return grad_theta_objective(v, K, A, r) - eta * K.grid.h * v


# --------------------------------------------------------------------------
# descent engine

def _armijo_ok(fn, f0, decrease):
    # sufficient decrease, with an allowance for rounding in f near a minimum
    return math.isfinite(fn) and fn <= f0 + ARMIJO_C * decrease + ROUND_SLACK * abs(f0)


def _descend(f, grad, x0, h, tol=DESCENT_TOL, max_iter=MAX_DESCENT, retract=None,
             tangent=None):
    """Gradient descent in the lumped metric with Barzilai-Borwein trial steps
    and Armijo backtracking. ``retract``/``tangent`` turn it into a projected
    (manifold) method."""
    x = x0.copy() if retract is None else retract(x0.copy())
    fx = f(x)
    g = grad(x)
    if tangent is not None:
        g = tangent(x, g)
    alpha = 1.0
    x_prev = g_prev = None
    for it in range(1, max_iter + 1):
        if _scaled(g, x, h) <= tol:
            return x, fx, it - 1
        d = -g / h
        if x_prev is not None:
            sx = x - x_prev
            sy = (g - g_prev) / h
            sty = float(sx @ sy)
            if sty > 0:
                alpha = float(sx @ sx) / sty
        slope = float(g @ d)
        t = alpha
        for _ in range(60):
            xn = x + t * d
            if retract is not None:
                xn = retract(xn)
            fn = f(xn)
            if _armijo_ok(fn, fx, t * slope):
                break
            t *= 0.5
        else:
            raise ConvergenceError(f"line search failed at iteration {it}")
        x_prev, g_prev = x, g
        x, fx = xn, fn
        g = grad(x)
        if tangent is not None:
            g = tangent(x, g)
    raise ConvergenceError(f"descent did not converge in {max_iter} iterations")


def _sign_fix(x, energy):
    """Return ``|x|`` after confirming it does not raise the energy."""
    ax = np.abs(x)
    e, ea = energy(x), energy(ax)
    if ea > e + 1e-10 * max(1.0, abs(e)):
        log.warning("energy of |u| exceeds energy of u (%.3e > %.3e)", ea, e)
    return ax


# --------------------------------------------------------------------------
# sublinear power problem

def power_supersolution(grid: Grid1D, s: float, p: float, N: int = 1) -> float:
    """``(R^2 e^{1/2 - rho_N})^{s/(2-p)}``, the explicit sup bound."""
    return sup_bound_constant(grid, N) ** (s / (2.0 - p))


def solve_sublinear_power(grid: Grid1D, s: float, p: float, u0=None,
                          K: OperatorMatrix | None = None, tol: float = STEP_TOL,
                          max_iter: int = MAX_FIXED_POINT) -> Solution:
    """Positive solution of ``K_s u = h u^{p-1}`` by the monotone iteration
    ``u <- K_s^{-1}(h u^{p-1})`` from a constant supersolution."""
    ProblemParams(s=s, p=p)
    _check_p_sub(p)
    K = _matrix(K, grid, s)
    h = grid.h
    factor = cho_factor(K.entries)
    u = np.full(grid.n, power_supersolution(grid, s, p) + 1.0) if u0 is None \
        else np.array(_values(u0, grid), dtype=float)
    if np.any(u <= 0):
        raise ParameterRangeError("initial iterate must be positive")
    monotone = True
    for it in range(1, max_iter + 1):
        un = cho_solve(factor, h * u ** (p - 1.0))
        if np.any(un <= 0):
            raise PositivityError(f"iterate lost positivity at step {it}")
        monotone &= bool(np.all(un <= u + 1e-14 * np.max(u)))
        step = float(np.max(np.abs(un - u)))
        u = un
        if step < tol:
            break
    else:
        raise ConvergenceError(f"fixed point did not converge in {max_iter} steps")
    res = _scaled(K.entries @ u - h * u ** (p - 1.0), u, h)
    if res > KKT_TOL:
        raise ConvergenceError(f"fixed point residual {res:.2e} above {KKT_TOL}")
    v = GridFunction(grid, u)
    return Solution(v, energy_Js(v, s, p, K), it, res, monotone=monotone)


def solve_lambda_min(grid: Grid1D, s: float, p: float, v0=None,
                     tol: float = DESCENT_TOL, max_iter: int = MAX_DESCENT) -> Solution:
    """``Lambda = min v^T K_s v`` over ``h sum |v|^p = 1`` on ``Omega/|Omega|``.

    ``grid`` is the physical grid; the solve runs on ``grid.rescaled()``.
    Projected descent on the 0-homogeneous quotient ``v^T K v / N(v)^{2/p}``,
    preconditioned by ``K`` and renormalized onto the constraint after each
    step, with Armijo backtracking.
    """
    ProblemParams(s=s, p=p)
    _check_p_sub(p)
    g_lam = grid.rescaled()
    K = assemble_fractional(g_lam, s)
    A_ = K.entries
    h = g_lam.h
    factor = cho_factor(A_)

    def norm_p(v):
        return h * np.sum(np.abs(v) ** p)

    def normalize(v):
        return v / norm_p(v) ** (1.0 / p)

    def F(v):
        return float(v @ A_ @ v) / norm_p(v) ** (2.0 / p)

    def resid(v, lam):
        return A_ @ v - lam * h * np.abs(v) ** (p - 2.0) * v

    v = normalize(np.ones(g_lam.n) if v0 is None else np.array(_values(v0, g_lam), float))
    fv = F(v)
    for it in range(1, max_iter + 1):
        lam = fv
        r = resid(v, lam)
        if _scaled(r, v, h) <= tol:
            break
        d = -cho_solve(factor, r)  # K^{-1} times the gradient direction
        slope = 2.0 * float(r @ d)
        t = 1.0
        for _ in range(60):
            vn = normalize(v + t * d)
            fn = F(vn)
            if _armijo_ok(fn, fv, t * slope):
                break
            t *= 0.5
        else:
            raise ConvergenceError(f"line search failed at iteration {it}")
        v, fv = vn, fn
    else:
        raise ConvergenceError(f"Lambda descent did not converge in {max_iter} steps")
    v = normalize(_sign_fix(v, F))
    lam = F(v)
    viol = abs(norm_p(v) - 1.0)
    if viol > 1e-9:
        raise ConstraintError(f"constraint violated by {viol:.2e}")
    res = _scaled(resid(v, lam), v, h)
    return Solution(GridFunction(g_lam, v), lam, it, res, multiplier=lam)


def rescaled_power_solution(sol: Solution, p: float) -> GridFunction:
    """``w = Lambda^{1/(p-2)} v`` on ``Omega/|Omega|``: the positive solution of
    the power problem on the rescaled domain, built from the constrained
    minimizer ``v`` with multiplier ``Lambda``."""
    return GridFunction(sol.u.grid, sol.multiplier ** (1.0 / (p - 2.0)) * sol.u.values)


def to_physical(w: GridFunction, grid: Grid1D, s: float, p: float) -> GridFunction:
    """``u(lam x) = lam^{2s/(2-p)} w(x)`` with ``lam = |Omega|``; node ``i`` of the
    rescaled grid maps to node ``i`` of ``grid``."""
    lam = grid.measure
    return GridFunction(grid, lam ** (2.0 * s / (2.0 - p)) * w.values)


# --------------------------------------------------------------------------
# constrained Theta problem and logistic problem

def theta_zero(measure: float, eps: float, A: float, r: float) -> float:
    """Limit value ``|Omega|/(2 eps) + A |Omega| / (r eps^{r/2})``."""
    return measure / (2.0 * eps) + A * measure / (r * eps ** (r / 2.0))


def theta_cap(eps: float, A: float, r: float) -> float:
    """``(1/A + eps^{(2-r)/2})^{1/(r-2)}``."""
    return (1.0 / A + eps ** ((2.0 - r) / 2.0)) ** (1.0 / (r - 2.0))


def solve_theta(grid: Grid1D, s: float, eps: float, A: float, r: float, u0=None,
                tol: float = DESCENT_TOL, max_iter: int = MAX_DESCENT) -> Solution:
    """Minimize ``L(u)`` on the sphere ``eps h sum u^2 / |Omega| = 1``."""
    ProblemParams(s=s, eps=eps, A=A, r=r)
    K = assemble_fractional(grid, s)
    h, meas = grid.h, grid.measure
    radius2 = meas / eps

    def retract(u):
        return u * math.sqrt(radius2 / (h * float(u @ u)))

    def tangent(u, g):
        return g - (float(g @ u) / float(u @ u)) * u

    f = lambda u: theta_objective(u, K, A, r)  # noqa: E731
    gr = lambda u: grad_theta_objective(u, K, A, r)  # noqa: E731
    start = np.ones(grid.n) if u0 is None else np.array(_values(u0, grid), float)
    u, _, it = _descend(f, gr, start, h, tol, max_iter, retract=retract, tangent=tangent)
    u = retract(_sign_fix(u, f))
    viol = abs(eps * h * float(u @ u) / meas - 1.0)
    if viol > 1e-9:
        raise ConstraintError(f"sphere constraint violated by {viol:.2e}")
    Th = f(u)
    lam = (float(u @ K.entries @ u) + A * h * np.sum(u**r)) / 2.0
    res = _scaled(gr(u) - 2.0 * lam * eps * h * u / meas, u, h)
    return Solution(GridFunction(grid, u), Th, it, res, multiplier=float(lam))


def logistic_params(k: float, p: float) -> ProblemParams:
    """``r = p + 1``, ``A = 1``, ``eps = (k-1)^{2/(1-p)}``; then ``eta0 = k``."""
    return ProblemParams(k=k, p=p, A=1.0, r=p + 1.0, eps=(k - 1.0) ** (2.0 / (1.0 - p)))


def solve_logistic(grid: Grid1D, s: float, k: float, p: float, u0=None,
                   tol: float = DESCENT_TOL, max_iter: int = MAX_DESCENT) -> Solution:
    """Positive solution of ``(-Delta)^s u = k u - u^p`` as the global minimizer
    of ``1/2 u^T K u + (A/r) h sum |u|^r - (eta0/2) h sum u^2``."""
    pp = logistic_params(k, p)
    ProblemParams(s=s)
    A, r, eta = pp.A, pp.r, pp.eta0
    K = assemble_fractional(grid, s)
    h = grid.h
    lam1 = first_eigenpair(K).lam
    if eta <= lam1:
        log.warning("eta0=%.6g <= lambda_1s=%.6g: only the trivial solution", eta, lam1)
        return Solution(grid.constant(0.0), 0.0, 0, 0.0, trivial=True)
    f = lambda u: logistic_energy(u, K, A, r, eta)  # noqa: E731
    gr = lambda u: grad_logistic_energy(u, K, A, r, eta)  # noqa: E731
    start = np.full(grid.n, (k - 1.0) ** (1.0 / (p - 1.0))) if u0 is None \
        else np.array(_values(u0, grid), float)
    u, _, it = _descend(f, gr, start, h, tol, max_iter)
    u = _sign_fix(u, f)
    if np.max(u) <= 1e-12:
        raise TrivialSolutionError("logistic descent collapsed to zero")
    res = _scaled(gr(u), u, h)
    return Solution(GridFunction(grid, u), f(u), it, res, multiplier=eta)


def logistic_cap(k: float, p: float) -> float:
    """``(eta0/A)^{1/(r-2)}`` with ``eta0 = k``, ``A = 1``, ``r = p + 1``."""
    return k ** (1.0 / (p - 1.0))


# --------------------------------------------------------------------------
# logarithmic limit problem

def log_sup_bound(grid: Grid1D, mu: float, N: int = 1) -> float:
    """``(R^2 e^{1/2 - rho_N})^{1/mu}``."""
    return sup_bound_constant(grid, N) ** (1.0 / mu)


def solve_log_sublinear(grid: Grid1D, mu: float, u0=None, tol: float = DESCENT_TOL,
                        max_iter: int = MAX_DESCENT) -> Solution:
    """Least-energy positive solution of ``L_Delta v = -mu ln|v| v``."""
    ProblemParams(mu=mu)
    K_L = assemble_log(grid)
    h = grid.h
    f = lambda u: energy_J0(u, mu, K_L)  # noqa: E731
    gr = lambda u: grad_J0(u, mu, K_L)  # noqa: E731
    c0 = 0.5 * min(1.0, log_sup_bound(grid, mu))
    start = np.full(grid.n, c0) if u0 is None else np.array(_values(u0, grid), float)
    u, _, it = _descend(f, gr, start, h, tol, max_iter)
    u = _sign_fix(u, f)
    if np.max(u) <= 1e-12:
        raise TrivialSolutionError("descent converged to the zero function")
    res = _scaled(gr(u), u, h)
    return Solution(GridFunction(grid, u), f(u), it, res)


# --------------------------------------------------------------------------
# convexity along the square-root path

def sqrt_path(t: float, u, v) -> np.ndarray:
    """``gamma(t, u, v) = ((1-t) u^2 + t v^2)^{1/2}``."""
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    return np.sqrt((1.0 - t) * u * u + t * v * v)


@dataclass(frozen=True)
class ConvexityReport:
    t: np.ndarray
    values: np.ndarray
    second_differences: np.ndarray
    tol: float = 1e-10

    @property
    def passed(self) -> bool:
        return bool(np.all(self.second_differences >= -self.tol))


def path_convexity_check(u, v, mu: float, samples: int = 21,
                         K_L: OperatorMatrix | None = None) -> ConvexityReport:
    """Sample ``g(t) = J_0(gamma(t,u,v))`` on ``samples`` equispaced points."""
    if isinstance(u, Solution):
        u = u.u
    grid = u.grid
    if samples < 5:
        raise ParameterRangeError("samples >= 5 required")
    uu = _values(u, grid)
    vv = _values(v, grid)
    if np.any(uu < 0) or np.any(vv < 0):
        raise ParameterRangeError("path endpoints must be nonnegative")
    K_L = _matrix(K_L, grid)
    t = np.linspace(0.0, 1.0, samples)
    g = np.array([energy_J0(sqrt_path(ti, uu, vv), mu, K_L) for ti in t])
    return ConvexityReport(t, g, g[:-2] - 2.0 * g[1:-1] + g[2:])


def minkowski_gap(theta: float, U1, U2) -> np.ndarray:
    """``(1-th)(dU1)^2 + th (dU2)^2 - (d gamma)^2`` over all node pairs; the path
    inequality says this is nonnegative."""
    U1 = np.asarray(U1, float)
    U2 = np.asarray(U2, float)
    G = sqrt_path(theta, U1, U2)
    d = lambda w: w[:, None] - w[None, :]  # noqa: E731
    return (1.0 - theta) * d(U1) ** 2 + theta * d(U2) ** 2 - d(G) ** 2
