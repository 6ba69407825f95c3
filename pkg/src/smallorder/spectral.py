"""First Dirichlet eigenpairs of the assembled operators.

The pencil is ``(K, h I)``: we look for ``K phi = lambda h phi`` with the
lumped normalization ``h phi^T phi = 1``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .core import Grid1D, GridFunction, ParameterRangeError, SmallOrderError
from .io import write_csv
from .operators import OperatorMatrix, assemble_fractional, assemble_log

log = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-9
DEGENERACY_GAP = 1e-8
MAX_ITER = 50_000


class EigenConvergenceError(SmallOrderError):
    pass


@dataclass(frozen=True)
class EigenPair:
    lam: float
    phi: GridFunction
    residual: float
    iterations: int
    gap_estimate: float
    degenerate: bool
    positive: bool


def gershgorin_lower(A: np.ndarray) -> float:
    off = np.sum(np.abs(A), axis=1) - np.abs(np.diag(A))
    return float(np.min(np.diag(A) - off))


def first_eigenpair(K: OperatorMatrix, tol: float = RESIDUAL_TOL,
                    max_iter: int = MAX_ITER) -> EigenPair:
    """Smallest eigenpair of ``(K, h I)`` by shifted inverse iteration.

    The shift sits one unit below the Gershgorin bound of ``K/h`` so the shifted
    matrix is positive definite and a Cholesky factor is reused throughout.
    The spectral gap is estimated from the observed contraction factor.
    """
    A = K.entries
    if not np.allclose(A, A.T, rtol=0, atol=1e-12 * max(1.0, np.abs(A).max())):
        raise ParameterRangeError("operator matrix is not symmetric")
    h = K.grid.h
    B = A / h
    shift = gershgorin_lower(B) - 1.0
    factor = cho_factor(B - shift * np.eye(K.n))
    x = np.ones(K.n)
    x /= math.sqrt(h * x @ x)
    prev_res = None
    ratio = 0.0
    for it in range(1, max_iter + 1):
        y = cho_solve(factor, x)
        x = y / math.sqrt(h * y @ y)
        lam = float(x @ B @ x) * h  # h x.x = 1
        res = float(np.max(np.abs(A @ x - lam * h * x)))
        if prev_res is not None and prev_res > 0:
            ratio = res / prev_res
        prev_res = res
        if res <= tol * 1e-2 or (res <= tol and it > 3):
            break
    else:
        raise EigenConvergenceError(
            f"inverse iteration stalled at residual {res:.3e} after {max_iter} steps")
    if x.sum() < 0:
        x = -x
    # contraction factor ~ (lam1 - shift)/(lam2 - shift)
    if 0 < ratio < 1:
        gap = (lam - shift) * (1.0 / ratio - 1.0)
    else:
        gap = 0.0
    degenerate = gap < DEGENERACY_GAP
    if degenerate:
        log.warning("first eigenvalue %.6g looks (nearly) degenerate, gap ~ %.2e", lam, gap)
    return EigenPair(lam=lam, phi=GridFunction(K.grid, x), residual=res, iterations=it,
                     gap_estimate=gap, degenerate=degenerate, positive=bool(np.all(x > 0)))


@dataclass(frozen=True)
class ExpansionRow:
    s: float
    lambda_s: float
    slope_s: float
    lambda1L: float

    @property
    def abs_gap(self) -> float:
        return abs(self.slope_s - self.lambda1L)


EXPANSION_COLUMNS = ("s", "lambda_s", "slope_s", "lambda1L", "abs_gap")


def eigen_expansion_check(grid: Grid1D, s_list) -> list[ExpansionRow]:
    """Compare ``(lambda_{1,s} - 1)/s`` with ``lambda_1^L`` along ``s_list``."""
    s_list = [float(s) for s in s_list]
    if not s_list:
        raise ParameterRangeError("s_list is empty")
    if any(not 0 < s < 0.25 for s in s_list):
        raise ParameterRangeError("every s must lie in (0, 1/4)")
    if any(b >= a for a, b in zip(s_list, s_list[1:])):
        raise ParameterRangeError("s_list must be strictly decreasing")
    lamL = first_eigenpair(assemble_log(grid)).lam
    rows = []
    for s in s_list:
        lam = first_eigenpair(assemble_fractional(grid, s)).lam
        rows.append(ExpansionRow(s, lam, (lam - 1.0) / s, lamL))
    return rows


def write_expansion_csv(path, rows):
    return write_csv(path, EXPANSION_COLUMNS,
                     [(r.s, r.lambda_s, r.slope_s, r.lambda1L, r.abs_gap) for r in rows])
