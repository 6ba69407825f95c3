"""Command-line runner: ``smallorder CONFIG [--output-dir DIR] [--quiet]``.

The command (assemble, eigen, solve, sweep) is taken from the config. Every run
writes ``manifest.json`` with all parameters, constants and tolerances; the
exit status is 0 iff every audit passed, 1 on a failed audit or solver error
and 2 on an invalid config.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import asymptotics, kernels, solvers, spectral
from .asymptotics import audit_bounds, sweep_case2, sweep_logistic, sweep_sublinear
from .config import ConfigError, ExperimentConfig, format_config, load_config
from .core import (
    EULER_GAMMA,
    GridFunction,
    SmallOrderError,
    frac_constant,
    log_constants,
    make_grid,
    norm_lp,
    sup_bound_constant,
)
from .io import SCHEMA_VERSION, atomic_write_text, write_csv, write_json
from .operators import assemble_fractional, assemble_log

log = logging.getLogger("smallorder")

GRADIENT_CHECK_TOL = 1e-5
FD_STEP = 1e-6


def _audit(name, lhs, rhs, source=""):
    return {"name": name, "source": source, "lhs": float(lhs), "rhs": float(rhs),
            "pass": bool(lhs <= rhs)}


def tolerances() -> dict:
    return {
        "eigen_residual": spectral.RESIDUAL_TOL,
        "eigen_degeneracy_gap": spectral.DEGENERACY_GAP,
        "fixed_point_step": solvers.STEP_TOL,
        "descent_gradient": solvers.DESCENT_TOL,
        "kkt": solvers.KKT_TOL,
        "armijo_c": solvers.ARMIJO_C,
        "panel_tol": kernels.PANEL_TOL,
        "gauss_order": kernels.GAUSS_ORDER,
        "max_refinement_depth": kernels.MAX_DEPTH,
        "slack_fraction": asymptotics.SLACK_FRACTION,
        "gradient_check": GRADIENT_CHECK_TOL,
        "fd_step": FD_STEP,
    }


def constants_used(cfg: ExperimentConfig) -> dict:
    grid = make_grid(*cfg.domain)
    c1, rho1 = log_constants(1)
    out = {"gamma": EULER_GAMMA, "c_1": c1, "rho_1": rho1, "h": grid.h, "R": grid.R,
           "measure": grid.measure, "R2_exp_half_minus_rho": sup_bound_constant(grid)}
    s_vals = []
    if cfg.problem.s is not None:
        s_vals.append(cfg.problem.s)
    if cfg.schedule is not None:
        s_vals.extend(cfg.schedule.s_list)
    out["c_1s"] = {repr(s): frac_constant(1, s) for s in s_vals}
    return out


def gradient_check(grid, energy, grad, rng) -> float:
    """Max relative error between ``grad`` and central differences of ``energy``
    on a seeded random positive profile."""
    u = 0.5 + rng.random(grid.n)
    g = grad(u)
    fd = np.empty_like(u)
    for i in range(grid.n):
        e = np.zeros_like(u)
        e[i] = FD_STEP
        fd[i] = (energy(u + e) - energy(u - e)) / (2 * FD_STEP)
    return float(np.max(np.abs(fd - g)) / np.max(np.abs(g)))


def _run_assemble(cfg, grid, out):
    K = assemble_fractional(grid, cfg.problem.s) if cfg.problem.kind == "fractional" \
        else assemble_log(grid)
    path = K.to_csv(out / "matrix.csv")
    asym = float(np.max(np.abs(K.entries - K.entries.T)))
    return [path], [_audit("symmetry", asym, 1e-12 * max(1.0, np.abs(K.entries).max()))], {}


def _run_eigen(cfg, grid, out):
    K = assemble_fractional(grid, cfg.problem.s) if cfg.problem.kind == "fractional" \
        else assemble_log(grid)
    e = spectral.first_eigenpair(K)
    files = [write_csv(out / "eigenvector.csv", ("x", "phi"), zip(grid.nodes, e.phi.values)),
             write_json(out / "eigen.json", {"lambda": e.lam, "residual": e.residual,
                                              "iterations": e.iterations,
                                              "gap_estimate": e.gap_estimate,
                                              "degenerate": e.degenerate,
                                              "positive": e.positive})]
    audits = [_audit("eigen residual", e.residual, spectral.RESIDUAL_TOL),
              {"name": "positivity", "lhs": float(e.phi.values.min()), "pass": e.positive},
              {"name": "non-degenerate", "lhs": e.gap_estimate, "pass": not e.degenerate}]
    return files, audits, {"lambda": e.lam}


def _run_solve(cfg, grid, out, rng):
    pr = cfg.problem
    kind = pr.kind
    audits = []
    if kind == "power":
        sol = solvers.solve_sublinear_power(grid, pr.s, pr.p)
        K = assemble_fractional(grid, pr.s)
        audits.append(_audit("sup bound", norm_lp(sol.u, math.inf),
                             1.1 * solvers.power_supersolution(grid, pr.s, pr.p), "uniform-sup-bound"))
        err = gradient_check(grid, lambda u: solvers.energy_Js(GridFunction(grid, u), pr.s,
                                                               pr.p, K),
                             lambda u: solvers.grad_Js(u, pr.s, pr.p, K), rng)
    elif kind == "lambda":
        sol = solvers.solve_lambda_min(grid, pr.s, pr.p)
        err = None
    elif kind == "theta":
        sol = solvers.solve_theta(grid, pr.s, pr.eps, pr.A, pr.r)
        K = assemble_fractional(grid, pr.s)
        err = gradient_check(grid, lambda u: solvers.theta_objective(u, K, pr.A, pr.r),
                             lambda u: solvers.grad_theta_objective(u, K, pr.A, pr.r), rng)
    elif kind == "logistic":
        sol = solvers.solve_logistic(grid, pr.s, pr.k, pr.p)
        audits.append(_audit("supersolution cap", norm_lp(sol.u, math.inf),
                             solvers.logistic_cap(pr.k, pr.p), "logistic-supersolution"))
        err = None
    else:
        sol = solvers.solve_log_sublinear(grid, pr.mu)
        K_L = assemble_log(grid)
        audits.append(_audit("sup bound", norm_lp(sol.u, math.inf),
                             solvers.log_sup_bound(grid, pr.mu), "log-sup-bound"))
        nehari = -0.25 * pr.mu * norm_lp(sol.u, 2) ** 2
        audits.append(_audit("Nehari identity (relative)",
                             abs(sol.energy - nehari) / abs(nehari), 1e-6))
        err = gradient_check(grid, lambda u: solvers.energy_J0(GridFunction(grid, u), pr.mu,
                                                               K_L),
                             lambda u: solvers.grad_J0(u, pr.mu, K_L), rng)
    audits.append(_audit("KKT residual", sol.kkt_residual, solvers.KKT_TOL))
    if err is not None:
        audits.append(_audit("gradient check (relative)", err, GRADIENT_CHECK_TOL))
    files = [sol.to_csv(out / "solution.csv"), sol.to_json(out / "solution.json")]
    return files, audits, sol.summary()


def _run_sweep(cfg, grid, out):
    sch, pr = cfg.schedule, cfg.problem
    if sch.regime == asymptotics.CASE2:
        rep = sweep_case2(grid, sch.mu, sch.s_list)
    elif sch.regime == asymptotics.SUBLINEAR:
        rep = sweep_sublinear(grid, sch.p, sch.s_list)
    else:
        rep = sweep_logistic(grid, sch.k, sch.p, sch.s_list,
                             eps=pr.eps if pr.eps is not None else 1.0,
                             A=pr.A if pr.A is not None else 1.0,
                             r=pr.r if pr.r is not None else 3.0)
    summary = audit_bounds(rep)
    audits = [{"name": line.rsplit(" ", 1)[0], "verdict": a.verdict,
               "pass": a.verdict != "FAIL"} for line, a in zip(summary.lines, rep.audits)]
    d = rep.column("dist_to_limit_l2")
    audits.append({"name": "distance to limit strictly decreasing", "pass":
                   rep.strictly_decreasing(), "values": d.tolist()})
    files = [rep.to_csv(out / "report.csv"), rep.to_json(out / "report.json")]
    return files, audits, {"warnings": rep.warnings, "constants": rep.constants}


def run(cfg: ExperimentConfig, output_dir=None, quiet: bool = False) -> int:
    """Execute ``cfg``; returns the process exit status."""
    out = Path(output_dir if output_dir is not None else cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(cfg.seed)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "command": cfg.command,
        "config": {"domain": list(cfg.domain), "problem": asdict(cfg.problem),
                   "schedule": None if cfg.schedule is None else asdict(cfg.schedule),
                   "seed": cfg.seed},
        "constants": constants_used(cfg),
        "tolerances": tolerances(),
    }
    atomic_write_text(out / "config.ini", format_config(cfg))
    try:
        grid = make_grid(*cfg.domain)
        if cfg.command == "assemble":
            files, audits, extra = _run_assemble(cfg, grid, out)
        elif cfg.command == "eigen":
            files, audits, extra = _run_eigen(cfg, grid, out)
        elif cfg.command == "solve":
            files, audits, extra = _run_solve(cfg, grid, out, rng)
        else:
            files, audits, extra = _run_sweep(cfg, grid, out)
    except SmallOrderError as exc:
        manifest.update(status="error", error={"name": type(exc).__name__, "message": str(exc)},
                        audits=[], all_audits_pass=False)
        write_json(out / "manifest.json", manifest)
        if not quiet:
            print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    ok = all(a["pass"] for a in audits)
    manifest.update(status="ok" if ok else "audit-failure", audits=audits,
                    all_audits_pass=ok, results=extra,
                    outputs=[str(Path(f).name) for f in files])
    write_json(out / "manifest.json", manifest)
    if not quiet:
        for a in audits:
            print(a.get("verdict", "PASS" if a["pass"] else "FAIL"), a["name"])
        print(f"wrote {len(files) + 2} files to {out}")
    return 0 if ok else 1


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="smallorder", description=__doc__.splitlines()[0])
    ap.add_argument("config", help="INI experiment config")
    ap.add_argument("--output-dir", default=None, help="override [run] output_dir")
    ap.add_argument("--quiet", action="store_true", help="suppress progress output")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 2
    return run(cfg, args.output_dir, args.quiet)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
