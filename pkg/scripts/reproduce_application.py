"""Reproduce the four-color application: 81 roots, merger breakdown, stability, images.

    python scripts/reproduce_application.py --out out/application
"""
import argparse
import json
import time
from collections import Counter
from pathlib import Path

from latticeperfect import io
from latticeperfect.coloring import ColoringMatrix, MergerMap, merge_coloring, merge_matrix
from latticeperfect.generators import Motif, motif_tiling
from latticeperfect.solver import Nonlinearity, SolverConfig, lift_solution, merger_breakdown, solve_all

APP = ColoringMatrix.of([[0, 2, 2, 0], [2, 0, 0, 2], [2, 0, 0, 2], [0, 2, 2, 0]], 4)
MERGERS = {
    "phi1": (1, 2, 3, 1),
    "phi2": (1, 2, 3, 2),
    "phi3": (1, 1, 1, 2),
    "phi4": (1, 1, 2, 2),
    "phi5": (1, 2, 2, 1),
}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--a", type=float, default=0.4)
    ap.add_argument("--d", type=float, default=0.005)
    ap.add_argument("--size", type=int, default=8, help="torus extent for rendered fields")
    ap.add_argument("--out", default="out/application")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    f = Nonlinearity.nagumo(args.a)
    t0 = time.perf_counter()
    sols = solve_all(APP, args.d, f, SolverConfig(d=args.d, workers=1))
    print(f"{len(sols)} roots in {time.perf_counter() - t0:.2f} s")
    print(sols.completeness_note)
    print("verdicts:", dict(Counter(r.verdict for r in sols.records)))
    for part, count in sorted(merger_breakdown(sols).items(), key=lambda kv: (len(kv[0]), kv[0])):
        label = "no proper merger" if not part else " ".join("{" + ",".join(map(str, b)) + "}" for b in part)
        print(f"  {label:24s} {count}")
    (out / "solutions.json").write_text(io.dumps(io.solutions_to_json(sols)))

    layout = motif_tiling("square", Motif.parse("1,2;3,4"), (args.size, args.size))
    (out / "gamma.ppm").write_bytes(io.ppm_bytes(io.color_pixels(layout), 16))
    for name, targets in MERGERS.items():
        phi = MergerMap(targets)
        try:
            m = merge_matrix(APP, phi).rows
        except ValueError as exc:
            m = f"not perfect ({exc})"
        print(f"{name}: {m}")
        (out / f"{name}.ppm").write_bytes(io.ppm_bytes(io.color_pixels(merge_coloring(layout, phi)), 16))

    stable = [r for r in sols.records if r.verdict == "stable"]
    for i, rec in enumerate(stable):
        u = lift_solution(layout, APP, rec.v)
        (out / f"stable_{i:02d}.ppm").write_bytes(io.ppm_bytes(io.field_pixels(u), 16))
    (out / "summary.json").write_text(
        json.dumps({"roots": len(sols), "stable": len(stable), "breakdown": {str(k): v for k, v in merger_breakdown(sols).items()}}, indent=1)
    )
    print(f"wrote images and JSON to {out}/")


if __name__ == "__main__":
    main()
