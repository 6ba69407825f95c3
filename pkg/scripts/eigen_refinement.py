"""Grid refinement of the half-Laplacian ground eigenvalue on (-1, 1).

Prints lambda_1 for n = 127, 255, 511 (h halves each time) and a Richardson
extrapolation with the observed order.

    python scripts/eigen_refinement.py [--s 0.5] [--out eigen_refinement.csv]
"""

import argparse
import math

from smallorder.core import make_grid
from smallorder.io import write_csv
from smallorder.operators import assemble_fractional
from smallorder.spectral import first_eigenpair


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--s", type=float, default=0.5)
    ap.add_argument("--out", default=None, help="optional CSV output path")
    args = ap.parse_args()
    ns = (127, 255, 511)
    lams = [first_eigenpair(assemble_fractional(make_grid(-1, 1, n), args.s)).lam for n in ns]
    d1, d2 = lams[1] - lams[0], lams[2] - lams[1]
    order = math.log2(abs(d1 / d2))
    extrap = lams[2] + d2 / (2**order - 1)
    for n, lam in zip(ns, lams):
        print(f"n={n:4d}  lambda_1={lam:.8f}")
    print(f"observed order {order:.3f}, extrapolated lambda_1 = {extrap:.8f}")
    if args.out:
        write_csv(args.out, ("n", "lambda_1"), zip(ns, lams))


if __name__ == "__main__":
    main()
