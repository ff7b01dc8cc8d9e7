"""Search small tori for every two-color matrix and set the findings beside the census tables.

A census entry "nonexistent" must never be contradicted; other entries are
merely expected to show up on some small torus.

    python scripts/census_corroboration.py --max-extent 6
"""
import argparse

from latticeperfect.coloring import Census, ColoringMatrix, two_color_census
from latticeperfect.generators import torus_search

GRIDS = {"square": 4, "triangular": 6, "hexagonal": 3}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-extent", type=int, default=6)
    args = ap.parse_args()
    contradictions = 0
    for kind, k in GRIDS.items():
        step = 2 if kind == "hexagonal" else 1
        extents = [(w, h) for w in range(step, args.max_extent + 1, step) for h in range(step, args.max_extent + 1, step)]
        print(f"\n{kind} (k = {k})")
        for a in range(k):
            for b in range(a, k):
                verdict = two_color_census(kind, a, b)
                m = ColoringMatrix.of([[a, k - a], [k - b, b]], k)
                hits = [(w, h) for w, h in extents if len(torus_search(kind, (w, h), m, limit=1, surjective=True))]
                smallest = min(hits, key=lambda e: e[0] * e[1]) if hits else None
                flag = ""
                if verdict == Census.NONEXISTENT and hits:
                    flag = "  <-- CONTRADICTION"
                    contradictions += 1
                print(f"  ({a},{b}) {verdict.value:18s} tori with a coloring: {len(hits):3d}  smallest: {smallest}{flag}")
    print(f"\ncontradictions: {contradictions}")


if __name__ == "__main__":
    main()
