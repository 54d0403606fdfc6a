"""Box-counting slopes: reference sets and the level counts of the Sing_2 sample."""
import argparse
import math
from fractions import Fraction

import numpy as np

from cuspflow.cantor import sing2_level_counts, sing2_pipeline
from cuspflow.product import box_count_dimension, dimension_targets, fit_box_counts


def thirds(depth):
    pts = [Fraction(0)]
    for k in range(1, depth + 1):
        pts = [p + d * Fraction(2, 3**k) for p in pts for d in (0, 1)]
    return [float(p) for p in pts]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--depths", default="6,8,10")
    args = ap.parse_args()
    n = 10**4
    seg = box_count_dimension(((np.arange(n) + 0.5) / n)[:, None], [2.0**-k for k in range(3, 11)])
    th = box_count_dimension(np.array(thirds(10))[:, None], [3.0**-k for k in range(2, 9)])
    print(f"segment slope {seg.slope:.4f}")
    print(f"middle thirds slope {th.slope:.4f} (log 2/log 3 = {math.log(2) / math.log(3):.4f})")
    print(f"targets k=2 n=2: {dimension_targets(2, 2)}")
    print("depth,p0,slope,rel_resid")
    for d in map(int, args.depths.split(",")):
        s = sing2_pipeline(depth=d)
        fit = fit_box_counts(*sing2_level_counts(s))
        print(f"{d},{s.p0},{fit.slope:.4f},{max(map(abs, fit.residuals)) / max(fit.log_counts):.3g}")


if __name__ == "__main__":
    main()
