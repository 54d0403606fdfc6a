"""Level-by-level lower-bound rows for D_delta and slice trees."""
import argparse

from cuspflow import Cusp
from cuspflow.cantor import build_ddelta, build_slice, evaluate_bound, level_separation


def show(name, tree):
    print(f"# {name}: {tree.params}")
    print("j,nodes,log_inv_d,ratio,s")
    for row, st in zip(evaluate_bound(tree).rows, tree.levels):
        print(f"{row.j},{st.nodes},{row.log_inv_d:.4f},{row.ratio:.4f},{row.s:.4f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--delta", type=float, default=1.0)
    ap.add_argument("--depth", type=int, default=6)
    args = ap.parse_args()
    dd = build_ddelta(Cusp(1, 5), args.delta, args.depth + 1, child_cap=2, level_cap=2)
    show("ddelta", dd)
    base = [nd.cusp.height for nd in dd.deepest_path()]
    sl = build_slice(base, args.delta, args.depth - 1, p0=1, level_cap=16, d_max=64)
    show("slice", sl)
    print(f"# slice level separation {level_separation(sl, base[1:]):.4f}")


if __name__ == "__main__":
    main()
