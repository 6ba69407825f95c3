"""Run the three asymptotic sweeps on (-1, 1) and write their reports.

    python scripts/run_sweeps.py [--n 256] [--out results] [--workers 3]

Writes ``<regime>.csv``/``<regime>.json`` per sweep plus the eigenvalue
expansion table, and prints the audit summary of each sweep.
"""

import argparse
from pathlib import Path

from smallorder.asymptotics import audit_bounds, sweep_case2, sweep_logistic, sweep_sublinear
from smallorder.core import make_grid
from smallorder.spectral import eigen_expansion_check, write_expansion_csv

S_LIST = (0.1, 0.05, 0.025)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=256)
    ap.add_argument("--out", default="results")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    grid = make_grid(-1, 1, args.n)
    reports = {
        "case2_mu1": sweep_case2(grid, 1.0, S_LIST, workers=args.workers),
        "sublinear_p1.5": sweep_sublinear(grid, 1.5, S_LIST, workers=args.workers),
        "logistic_k2_p3": sweep_logistic(grid, 2.0, 3.0, S_LIST, workers=args.workers),
        "logistic_k5_p3": sweep_logistic(grid, 5.0, 3.0, S_LIST, workers=args.workers),
    }
    for name, rep in reports.items():
        rep.to_csv(out / f"{name}.csv")
        rep.to_json(out / f"{name}.json")
        summary = audit_bounds(rep)
        dist = ", ".join(f"{d:.4g}" for d in rep.column("dist_to_limit_l2"))
        print(f"== {name}: distance to limit {dist} "
              f"({'decreasing' if rep.strictly_decreasing() else 'NOT decreasing'})")
        for line in summary.lines:
            print("  " + line)
    rows = eigen_expansion_check(grid, S_LIST)
    write_expansion_csv(out / "eigen_expansion.csv", rows)
    print("== eigen expansion gaps:", ", ".join(f"{r.abs_gap:.4g}" for r in rows))


if __name__ == "__main__":
    main()
