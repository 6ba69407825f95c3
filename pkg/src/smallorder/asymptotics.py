"""Small-order sweeps along decreasing ``s`` with bound audits.

Every sweep runs on a fixed grid; distances to the predicted limit are
lumped ``L^2`` norms on that grid, and each explicit bound from the theory is
audited as ``lhs <= rhs + slack`` with ``slack = slack_fraction * |rhs|``.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import Grid1D, ParameterRangeError, norm_lp
from .io import SCHEMA_VERSION, write_csv, write_json
from .operators import assemble_fractional, assemble_log, qform
from .solvers import (
    log_sup_bound,
    logistic_cap,
    power_supersolution,
    rescaled_power_solution,
    solve_lambda_min,
    solve_log_sublinear,
    solve_logistic,
    solve_sublinear_power,
    solve_theta,
    theta_cap,
    theta_zero,
    to_physical,
)
from .spectral import first_eigenpair

log = logging.getLogger(__name__)

SLACK_FRACTION = 0.1
RESCALE_TOL = 1e-6
CASE2 = "case2"
SUBLINEAR = "sublinear"
LOGISTIC = "logistic"
REGIMES = (CASE2, SUBLINEAR, LOGISTIC)


@dataclass(frozen=True)
class Schedule:
    regime: str
    s_list: tuple
    mu: float | None = None
    p: float | None = None
    k: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "s_list", tuple(float(s) for s in self.s_list))
        errs = self.violations()
        if errs:
            raise ParameterRangeError("; ".join(errs))

    def violations(self) -> list[str]:
        out = []
        s = self.s_list
        if self.regime not in REGIMES:
            out.append(f"regime must be one of {REGIMES}, got {self.regime!r}")
        if len(s) < 3:
            out.append(f"s_list needs >= 3 entries, got {len(s)}")
        if any(not 0 < x < 0.25 for x in s):
            out.append(f"s_list entries must lie in (0, 1/4): {list(s)}")
        if any(b >= a for a, b in zip(s, s[1:])):
            out.append(f"s_list must be strictly decreasing: {list(s)}")
        if self.regime == CASE2:
            if self.mu is None or not self.mu > 0:
                out.append(f"mu>0 violated: mu={self.mu}")
            else:
                bad = [x for x in s if not 1 < 2 - self.mu * x < 2]
                if bad:
                    out.append(f"p_n = 2 - mu*s must lie in (1,2); fails at s={bad}")
        elif self.regime == SUBLINEAR:
            if self.p is None or not 1 <= self.p < 2:
                out.append(f"p in [1,2) violated: p={self.p}")
            elif self.p == 1:
                out.append("p=1 is a limit label only; solves need p>1")
        elif self.regime == LOGISTIC:
            if self.k is None or not self.k > 1:
                out.append(f"k>1 violated: k={self.k}")
            if self.p is None or not self.p > 1:
                out.append(f"p>1 violated: p={self.p}")
        return out

    def p_effective(self, s: float) -> float:
        return 2.0 - self.mu * s if self.regime == CASE2 else self.p


@dataclass(frozen=True)
class BoundAudit:
    name: str
    source: str
    s: float
    lhs: float
    rhs: float
    slack: float
    enforced: bool = True

    @property
    def passed(self) -> bool:
        return bool(self.lhs <= self.rhs + self.slack)

    @property
    def verdict(self) -> str:
        if not self.enforced:
            return "INFO"
        return "PASS" if self.passed else "FAIL"


def _audit(name, source, s, lhs, rhs, frac, enforced=True):
    return BoundAudit(name, source, s, float(lhs), float(rhs), frac * abs(float(rhs)),
                      bool(enforced))


@dataclass(frozen=True)
class SweepRecord:
    s: float
    p_effective: float
    sup_norm: float
    l2_norm: float
    energy_norm_s: float
    dist_to_limit_l2: float
    audits: tuple = ()
    lambda_gap: float | None = None
    theta: float | None = None
    theta_gap: float | None = None
    trivial: bool = False


CSV_COLUMNS = ("s", "p_effective", "sup_norm", "l2_norm", "energy_norm_s",
               "dist_to_limit_l2", "lambda_gap", "theta", "theta_gap", "trivial",
               "audits_pass")


@dataclass
class SweepReport:
    regime: str
    grid: Grid1D
    schedule: Schedule
    reference: str
    records: list = field(default_factory=list)
    prologue_audits: list = field(default_factory=list)
    slack_fraction: float = SLACK_FRACTION
    warnings: list = field(default_factory=list)
    constants: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    def strictly_decreasing(self, name: str = "dist_to_limit_l2") -> bool:
        c = self.column(name)
        return bool(np.all(np.diff(c) < 0))

    @property
    def audits(self) -> list:
        return list(self.prologue_audits) + [a for r in self.records for a in r.audits]

    def to_csv(self, path):
        rows = [(r.s, r.p_effective, r.sup_norm, r.l2_norm, r.energy_norm_s,
                 r.dist_to_limit_l2, r.lambda_gap, r.theta, r.theta_gap, r.trivial,
                 all(a.passed for a in r.audits if a.enforced)) for r in self.records]
        return write_csv(path, CSV_COLUMNS, rows)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "regime": self.regime,
            "grid": {"a": self.grid.a, "b": self.grid.b, "n": self.grid.n, "h": self.grid.h},
            "schedule": {"s_list": list(self.schedule.s_list), "mu": self.schedule.mu,
                         "p": self.schedule.p, "k": self.schedule.k},
            "reference": self.reference,
            "slack_fraction": self.slack_fraction,
            "constants": self.constants,
            "warnings": self.warnings,
            "records": [{
                "s": r.s, "p_effective": r.p_effective, "sup_norm": r.sup_norm,
                "l2_norm": r.l2_norm, "energy_norm_s": r.energy_norm_s,
                "dist_to_limit_l2": r.dist_to_limit_l2, "lambda_gap": r.lambda_gap,
                "theta": r.theta, "theta_gap": r.theta_gap, "trivial": r.trivial,
                "audits": [_audit_dict(a) for a in r.audits],
            } for r in self.records],
            "prologue_audits": [_audit_dict(a) for a in self.prologue_audits],
            "distance_strictly_decreasing": self.strictly_decreasing(),
        }

    def to_json(self, path):
        return write_json(path, self.to_dict())


def _audit_dict(a: BoundAudit) -> dict:
    return {"name": a.name, "source": a.source, "s": a.s, "lhs": a.lhs, "rhs": a.rhs,
            "slack": a.slack, "enforced": a.enforced, "pass": a.passed, "verdict": a.verdict}


def _check_grid_scale(grid: Grid1D, s_list) -> list[str]:
    thr = math.sqrt(grid.h)
    small = [s for s in s_list if s < thr]
    if not small:
        return []
    msg = (f"s < h^(1/2) = {thr:.4g} for s in {small}: fixed-grid effects may dominate "
           "the small-order limit")
    log.warning(msg)
    return [msg]


def _map(fn, items, workers):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


def _norms(u, K):
    return norm_lp(u, math.inf), norm_lp(u, 2), qform(K, u)


def sweep_case2(grid: Grid1D, mu: float, s_list, slack_fraction: float = SLACK_FRACTION,
                workers: int = 1) -> SweepReport:
    """Power problem with ``p_n = 2 - mu s_n`` against the logarithmic limit."""
    sched = Schedule(CASE2, tuple(s_list), mu=mu)
    rep = SweepReport(CASE2, grid, sched, "u0: least-energy solution of the log problem",
                      slack_fraction=slack_fraction,
                      warnings=_check_grid_scale(grid, sched.s_list))
    # serial prologue: reference solution and first log eigenpair
    u0 = solve_log_sublinear(grid, mu)
    eig = first_eigenpair(assemble_log(grid))
    lamL, phi = eig.lam, eig.phi.values
    h, meas = grid.h, grid.measure
    phi2 = h * float(phi @ phi)
    ent = h * float(np.sum(np.log(phi) * phi * phi))
    upper = meas * math.exp(-2.0 * lamL / mu)
    lower = 0.5 * math.log(2.0) * math.exp(-2.0 * lamL / mu - 2.0 * ent + 1.0) * phi2
    sup_cap = log_sup_bound(grid, mu)
    rep.constants.update(lambda1L=lamL, ebounds_upper=upper, ebounds_lower=lower,
                         sup_bound=sup_cap)
    rep.prologue_audits.append(_audit("sup bound of u0", "log-sup-bound", 0.0,
                                      norm_lp(u0.u, math.inf), sup_cap, slack_fraction))

    def one(s):
        p = sched.p_effective(s)
        last = s == sched.s_list[-1]
        K = assemble_fractional(grid, s)
        sol = solve_sublinear_power(grid, s, p, K=K)
        sup, l2, en = _norms(sol.u, K)
        audits = (
            _audit("sup bound", "uniform-sup-bound", s, sup, power_supersolution(grid, s, p),
                   slack_fraction),
            _audit("energy upper bound", "energy-bounds", s, en, upper, slack_fraction, last),
            _audit("energy lower bound", "energy-bounds", s, lower, en, slack_fraction, last),
            _audit("L2 bound", "l2-bound", s, l2**2, upper, slack_fraction, last),
        )
        return SweepRecord(s, p, sup, l2, en, norm_lp(sol.u - u0.u, 2), audits)

    rep.records = sorted(_map(one, sched.s_list, workers), key=lambda r: -r.s)
    return rep


def sweep_sublinear(grid: Grid1D, p: float, s_list, slack_fraction: float = SLACK_FRACTION,
                    workers: int = 1) -> SweepReport:
    """Fixed-``p`` power problem against the constant 1, plus the constrained
    ``Lambda`` problem on the rescaled domain."""
    sched = Schedule(SUBLINEAR, tuple(s_list), p=p)
    rep = SweepReport(SUBLINEAR, grid, sched, "constant 1", slack_fraction=slack_fraction,
                      warnings=_check_grid_scale(grid, sched.s_list))

    def one(s):
        K = assemble_fractional(grid, s)
        sol = solve_sublinear_power(grid, s, p, K=K)
        lam = solve_lambda_min(grid, s, p)
        w = rescaled_power_solution(lam, p)
        w_direct = solve_sublinear_power(w.grid, s, p)
        consistency = norm_lp(w - w_direct.u, math.inf)
        # the map back to Omega is exact only in the continuum; O(h^2) here
        defect = norm_lp(to_physical(w, grid, s, p) - sol.u, math.inf)
        sup, l2, en = _norms(sol.u, K)
        audits = (
            _audit("sup bound", "uniform-sup-bound", s, sup, power_supersolution(grid, s, p),
                   slack_fraction),
            _audit("Lambda rescaling consistency", "power-rescaling", s, consistency,
                   RESCALE_TOL, 0.0),
            _audit("physical-domain scaling defect", "power-rescaling", s, defect, RESCALE_TOL,
                   0.0, enforced=False),
        )
        return SweepRecord(s, p, sup, l2, en, norm_lp(sol.u - 1.0, 2), audits,
                           lambda_gap=abs(lam.multiplier - 1.0))

    rep.records = sorted(_map(one, sched.s_list, workers), key=lambda r: -r.s)
    return rep


def sweep_logistic(grid: Grid1D, k: float, p: float, s_list, eps: float = 1.0,
                   A: float = 1.0, r: float = 3.0, slack_fraction: float = SLACK_FRACTION,
                   workers: int = 1) -> SweepReport:
    """Logistic problem against ``(k-1)^{1/(p-1)}`` with the ``Theta`` audit."""
    sched = Schedule(LOGISTIC, tuple(s_list), k=k, p=p)
    target = (k - 1.0) ** (1.0 / (p - 1.0))
    th0 = theta_zero(grid.measure, eps, A, r)
    rep = SweepReport(LOGISTIC, grid, sched, f"constant {target!r}",
                      slack_fraction=slack_fraction,
                      warnings=_check_grid_scale(grid, sched.s_list))
    rep.constants.update(target=target, theta0=th0, theta_eps=eps, theta_A=A, theta_r=r,
                         logistic_cap=logistic_cap(k, p), theta_cap=theta_cap(eps, A, r))

    def one(s):
        K = assemble_fractional(grid, s)
        sol = solve_logistic(grid, s, k, p)
        th = solve_theta(grid, s, eps, A, r)
        sup, l2, en = _norms(sol.u, K)
        audits = (
            _audit("supersolution cap", "logistic-supersolution", s, sup, logistic_cap(k, p), 0.0),
            _audit("Theta minimizer cap", "theta-minimizer-cap", s, norm_lp(th.u, math.inf),
                   theta_cap(eps, A, r), slack_fraction, s == sched.s_list[-1]),
        )
        return SweepRecord(s, p, sup, l2, en, norm_lp(sol.u - target, 2), audits,
                           theta=th.energy, theta_gap=abs(th.energy - th0),
                           trivial=sol.trivial)

    rep.records = sorted(_map(one, sched.s_list, workers), key=lambda r: -r.s)
    return rep


@dataclass(frozen=True)
class AuditSummary:
    lines: tuple
    passed: bool
    failed: tuple = ()


def audit_bounds(report) -> AuditSummary:
    """One line per audited bound; the overall verdict is the conjunction over
    enforced audits. Bounds that only hold up to an ``o(1)`` term are enforced at
    the smallest ``s`` of the schedule and reported as INFO elsewhere."""
    audits = report.audits if hasattr(report, "audits") else list(report)
    lines, failed = [], []
    for a in audits:
        lines.append(f"{a.name} [{a.source}] s={a.s:g} lhs={a.lhs:.6g} rhs={a.rhs:.6g} "
                     f"slack={a.slack:.3g} {a.verdict}")
        if a.verdict == "FAIL":
            failed.append(a.name)
    return AuditSummary(tuple(lines), not failed, tuple(failed))
