"""Solution counts of the two-color anti-diagonal system along a d grid.

The heterogeneous pair around (1/2, 1/2) exists iff d < 1/16.

    python scripts/bifurcation_sweep.py --a 0.5
"""
import argparse

import numpy as np

from latticeperfect.coloring import ColoringMatrix
from latticeperfect.solver import Nonlinearity, bisect_transition, has_heterogeneous_pair, solve_all


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--a", type=float, default=0.5)
    ap.add_argument("--dmin", type=float, default=1e-3)
    ap.add_argument("--dmax", type=float, default=1.0)
    ap.add_argument("--points", type=int, default=25)
    args = ap.parse_args()
    m = ColoringMatrix.of([[0, 2], [2, 0]], 2)
    f = Nonlinearity.nagumo(args.a)
    print(f"{'d':>10s} {'count':>6s} {'stable':>6s} pair")
    for d in np.geomspace(args.dmin, args.dmax, args.points):
        s = solve_all(m, d, f)
        stable = sum(r.verdict == "stable" for r in s.records)
        print(f"{d:10.5f} {len(s):6d} {stable:6d} {has_heterogeneous_pair(s, center=args.a)}")
    lo, hi = bisect_transition(lambda d: has_heterogeneous_pair(solve_all(m, d, f), center=args.a), 0.01, 0.5, 1e-5)
    print(f"pair disappears in [{lo:.5f}, {hi:.5f}]; 1/16 = {1 / 16:.5f}")


if __name__ == "__main__":
    main()
