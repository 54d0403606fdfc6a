"""Annulus counts and the fitted growth exponent for a few base cusps."""
import argparse
import math

import numpy as np

from cuspflow import Cusp, growth_exponent


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--t-max", type=float, default=14.0)
    ap.add_argument("--points", type=int, default=11)
    ap.add_argument("--workers", type=int, default=None)
    args = ap.parse_args()
    ts = np.linspace(4, args.t_max, args.points)
    print("cusp,A1,A2,A3,slope,upsilon,max_resid")
    for a in (Cusp(0, 1), Cusp(1, 2), Cusp(1, 3)):
        for A in ((1, 4, 1), (1, 2, 1), (2, 8, 1)):
            fit = growth_exponent(a, *A, ts, workers=args.workers)
            print(f"{a},{A[0]},{A[1]},{A[2]},{fit.slope:.4f},{fit.upsilon:.4f},{max(map(abs, fit.residuals)):.3g}")


if __name__ == "__main__":
    main()
