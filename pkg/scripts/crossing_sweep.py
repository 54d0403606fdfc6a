"""Crossing exponent of the truncated covering sum against delta and the height cutoff."""
import argparse
from fractions import Fraction

from cuspflow import Cusp, make_node
from cuspflow.covering import Truncation, crossing_exponent


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", default="1/11,0/1")
    ap.add_argument("--i", type=int, default=0)
    ap.add_argument("--j", type=int, default=1)
    ap.add_argument("--h-max", default="1e4,1e5,1e6")
    ap.add_argument("--max-nodes", type=int, default=10**5)
    args = ap.parse_args()
    cusps = [Cusp(Fraction(s).numerator, Fraction(s).denominator) for s in args.seed.split(",")]
    print("delta,h_max,terms,truncated,sum_lo,sum_hi,s_star")
    for delta in (Fraction(1, 10), Fraction(3, 100), Fraction(1, 100)):
        node = make_node(cusps, args.i, args.j, delta)
        for h in args.h_max.split(","):
            c = crossing_exponent(node, delta, Truncation(int(float(h)), args.max_nodes))
            s = "none" if c.s_star is None else f"{c.s_star:.4f}"
            print(f"{delta},{h},{c.terms},{c.truncated},{c.sum_lo:.4g},{c.sum_hi:.4g},{s}")


if __name__ == "__main__":
    main()
