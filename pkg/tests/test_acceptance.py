"""Acceptance criteria 1-11. Each test prints one PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

from _oracles import fractional_form, h_omega_quad, log_form, mp_digamma, mp_frac_constant, rel
from _report import verdict
from smallorder.asymptotics import audit_bounds, sweep_case2, sweep_logistic, sweep_sublinear
from smallorder.core import EULER_GAMMA, frac_constant, log_constants, make_grid, norm_lp
from smallorder.operators import (
    assemble_fractional,
    assemble_log,
    h_omega,
    qform,
    small_order_residual,
)
from smallorder.solvers import (
    energy_J0,
    energy_Js,
    grad_J0,
    grad_Js,
    grad_theta_objective,
    log_sup_bound,
    logistic_cap,
    minkowski_gap,
    path_convexity_check,
    power_supersolution,
    solve_lambda_min,
    solve_log_sublinear,
    solve_logistic,
    solve_sublinear_power,
    solve_theta,
    theta_cap,
    theta_objective,
)
from smallorder.spectral import eigen_expansion_check

S_LIST = (0.1, 0.05, 0.025)


def profile(x):
    return (1 - x**2) ** 4


@pytest.fixture(scope="module")
def g256():
    return make_grid(-1, 1, 256)


def _decreasing(v):
    return all(a > b for a, b in zip(v, v[1:]))


def test_criterion_01_constants():
    t0 = time.perf_counter()
    c1, rho1 = log_constants(1)
    _, rho2 = log_constants(2)
    c_half = frac_constant(1, 0.5)
    elapsed = time.perf_counter() - t0
    # independent oracles: mpmath Gamma (c_N = pi^{-N/2} Gamma(N/2)) and digamma
    from mpmath import gamma, mp, pi

    with mp.workdps(30):
        c1_ref = float(gamma(0.5) / pi**0.5)
    errs = [abs(c1 - c1_ref),
            abs(rho1 - (2 * math.log(2) + mp_digamma(0.5) - EULER_GAMMA)),
            abs(rho2 - (2 * math.log(2) + mp_digamma(1.0) - EULER_GAMMA)),
            abs(c_half - mp_frac_constant(1, 0.5)), abs(c_half - 1 / math.pi)]
    ok = max(errs) <= 1e-10 and elapsed < 1.0 and abs(rho1 + 1.1544313) < 1e-7 \
        and abs(rho2 - 0.2318631) < 1e-7
    assert verdict(1, ok, f"max constant error {max(errs):.1e}, {elapsed * 1e3:.2f} ms")


def test_criterion_02_operator_oracles():
    t0 = time.perf_counter()
    g = make_grid(-1, 1, 64)
    u = g.interpolate(profile).values
    errs = {f"K_{s}": rel(qform(assemble_fractional(g, s), u), fractional_form(g, u, s))
            for s in (0.1, 0.5)}
    errs["K_L"] = rel(qform(assemble_log(g), u), log_form(g, u))
    xs = np.linspace(-1, 1, 22)[1:-1]
    h_err = max(abs(h_omega(x, g) - h_omega_quad(x, -1.0, 1.0)) for x in xs)
    elapsed = time.perf_counter() - t0
    ok = max(errs.values()) <= 1e-3 and h_err <= 1e-10 and elapsed < 60
    detail = ", ".join(f"{k} rel {v:.1e}" for k, v in errs.items())
    assert verdict(2, ok, f"{detail}; h_omega max err {h_err:.1e} at 20 points; "
                          f"{elapsed:.1f} s")


def test_criterion_03_small_order_residual():
    g = make_grid(-1, 1, 128)
    phi = g.interpolate(profile)
    r = [small_order_residual(phi, s) for s in S_LIST]
    assert verdict(3, _decreasing(r), "residuals " + ", ".join(f"{x:.4g}" for x in r))


def test_criterion_04_eigen_expansion(g256):
    gaps = [row.abs_gap for row in eigen_expansion_check(g256, S_LIST)]
    assert verdict(4, _decreasing(gaps), "|slope - lambda_1^L| " +
                   ", ".join(f"{x:.4g}" for x in gaps))


def test_criterion_05_sublinear_power(g256):
    rep = sweep_sublinear(g256, 1.5, S_LIST)
    d = rep.column("dist_to_limit_l2")
    sups = [(a.lhs, a.rhs) for a in rep.audits if a.source == "uniform-sup-bound"]
    bound_ok = len(sups) == 3 and all(lhs <= 1.1 * rhs for lhs, rhs in sups)
    ok = _decreasing(d) and bound_ok
    assert verdict(5, ok, "|u_s - 1|_2 " + ", ".join(f"{x:.4g}" for x in d) +
                   f"; sup bound {'holds' if bound_ok else 'violated'}")


def test_criterion_06_logistic(g256):
    parts, ok = [], True
    for k, target in ((2.0, 1.0), (5.0, 2.0)):
        rep = sweep_logistic(g256, k, 3.0, S_LIST)
        d = rep.column("dist_to_limit_l2")
        cap_ok = all(x <= logistic_cap(k, 3.0) for x in rep.column("sup_norm"))
        ok &= _decreasing(d) and cap_ok and not any(r.trivial for r in rep.records)
        parts.append(f"k={k:g}: " + ", ".join(f"{x:.4g}" for x in d))
    assert verdict(6, ok, "; ".join(parts) + "; caps hold" if ok else "; ".join(parts))


def test_criterion_07_case2(g256):
    rep = sweep_case2(g256, 1.0, S_LIST)
    d = rep.column("dist_to_limit_l2")
    u0 = solve_log_sublinear(g256, 1.0)
    cap = log_sup_bound(g256, 1.0)
    sup_ok = norm_lp(u0.u, math.inf) <= cap and abs(cap - 83.7) < 0.05
    nehari = rel(u0.energy, -0.25 * norm_lp(u0.u, 2) ** 2)
    eb = [a for a in rep.audits if a.source == "energy-bounds" and a.s == S_LIST[-1]]
    eb_ok = len(eb) == 2 and all(a.lhs <= a.rhs + 0.1 * abs(a.rhs) for a in eb)
    ok = _decreasing(d) and sup_ok and nehari <= 1e-6 and eb_ok and audit_bounds(rep).passed
    assert verdict(7, ok, "|u_n - u_0|_2 " + ", ".join(f"{x:.4g}" for x in d) +
                   f"; sup {norm_lp(u0.u, math.inf):.4g} <= {cap:.4g}; Nehari rel "
                   f"{nehari:.1e}; energy bounds at s=0.025 "
                   f"{'pass' if eb_ok else 'fail'}")


def test_criterion_08_theta(g256):
    sols = [solve_theta(g256, s, 1.0, 1.0, 3.0) for s in S_LIST]
    gaps = [abs(x.energy - 5 / 3) for x in sols]
    cap_ok = all(x.u.values.max() <= 1.1 * theta_cap(1.0, 1.0, 3.0) for x in sols)
    ok = _decreasing(gaps) and cap_ok
    assert verdict(8, ok, "|Theta_s - 5/3| " + ", ".join(f"{x:.4g}" for x in gaps) +
                   f"; cap {'holds' if cap_ok else 'violated'}")


def _fd(f, u, step=1e-6):
    out = np.empty_like(u)
    for i in range(u.size):
        e = np.zeros_like(u)
        e[i] = step
        out[i] = (f(u + e) - f(u - e)) / (2 * step)
    return out


def test_criterion_09_gradients():
    g = make_grid(-1, 1, 64)
    K = assemble_fractional(g, 0.1)
    KL = assemble_log(g)
    pairs = {"J_s": (lambda u: energy_Js(u, 0.1, 1.5, K), lambda u: grad_Js(u, 0.1, 1.5, K)),
             "J_0": (lambda u: energy_J0(u, 1.0, KL), lambda u: grad_J0(u, 1.0, KL)),
             "Theta": (lambda u: theta_objective(u, K, 1.0, 3.0),
                       lambda u: grad_theta_objective(u, K, 1.0, 3.0))}
    worst = {k: 0.0 for k in pairs}
    for seed in range(10):
        u = 0.5 + np.random.default_rng(seed).random(g.n)
        for name, (f, gr) in pairs.items():
            an = gr(u)
            worst[name] = max(worst[name], np.max(np.abs(_fd(f, u) - an)) / np.max(np.abs(an)))
    ok = max(worst.values()) <= 1e-5
    assert verdict(9, ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))


def test_criterion_10_convexity(g256):
    u = solve_log_sublinear(g256, 1.0)
    KL = assemble_log(g256)
    worst = math.inf
    for seed in range(5):
        v = u.u.values * (0.2 + 2 * np.random.default_rng(seed).random(g256.n))
        rep = path_convexity_check(u, v, 1.0, samples=21, K_L=KL)
        worst = min(worst, rep.second_differences.min())
    rng = np.random.default_rng(2024)
    mink = math.inf
    for _ in range(100):
        theta = rng.random()
        U1, U2 = 5 * rng.random(32), 5 * rng.random(32)
        mink = min(mink, minkowski_gap(theta, U1, U2).min())
    ok = worst >= -1e-10 and mink >= -1e-12
    assert verdict(10, ok, f"min second difference {worst:.2e}; min Minkowski gap {mink:.2e}")


def test_criterion_11_uniqueness(g256):
    g = g256
    diffs = {}
    a = solve_sublinear_power(g, 0.1, 1.5)
    b = solve_sublinear_power(g, 0.1, 1.5,
                              u0=np.full(g.n, 10 * power_supersolution(g, 0.1, 1.5)))
    diffs["power"] = np.abs(a.u.values - b.u.values).max()
    tilt = 1.0 + 0.5 * g.nodes
    a = solve_lambda_min(g, 0.05, 1.5)
    b = solve_lambda_min(g, 0.05, 1.5, v0=1.0 + 0.5 * g.rescaled().nodes)
    diffs["lambda"] = np.abs(a.u.values - b.u.values).max()
    a = solve_theta(g, 0.05, 1.0, 1.0, 3.0)
    b = solve_theta(g, 0.05, 1.0, 1.0, 3.0, u0=tilt)
    diffs["theta"] = np.abs(a.u.values - b.u.values).max()
    a = solve_logistic(g, 0.05, 2.0, 3.0)
    b = solve_logistic(g, 0.05, 2.0, 3.0, u0=tilt)
    diffs["logistic"] = np.abs(a.u.values - b.u.values).max()
    a = solve_log_sublinear(g, 1.0)
    b = solve_log_sublinear(g, 1.0, u0=g.interpolate(lambda x: 2 * (1 - x**2)))
    diffs["log"] = np.abs(a.u.values - b.u.values).max()
    ok = max(diffs.values()) <= 1e-6
    assert verdict(11, ok, ", ".join(f"{k} {v:.1e}" for k, v in diffs.items()))
