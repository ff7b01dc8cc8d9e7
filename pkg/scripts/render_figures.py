"""Render the pattern gallery: checkerboard, application layouts, bit-word staircases, tree text.

    python scripts/render_figures.py --out out/figures
"""
import argparse
from pathlib import Path

from latticeperfect import io
from latticeperfect.coloring import ColoringMatrix, MergerMap, merge_coloring, refine_partition
from latticeperfect.dynamics import spine_extent_for_island, tree_counterexample
from latticeperfect.generators import CHECKER_3, STRIPES_22, Motif, bit_sequence_coloring, motif_tiling


def save(out: Path, name: str, pixels, scale: int) -> None:
    (out / f"{name}.ppm").write_bytes(io.ppm_bytes(pixels, scale))
    (out / f"{name}.svg").write_text(io.svg_text(pixels, scale))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="out/figures")
    ap.add_argument("--scale", type=int, default=12)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    save(out, "checkerboard", io.color_pixels(motif_tiling("square", Motif.parse("1,2;2,1"), (8, 8))), args.scale)
    layout = motif_tiling("square", Motif.parse("1,2;3,4"), (8, 8))
    save(out, "gamma", io.color_pixels(layout), args.scale)
    save(out, "gamma1", io.color_pixels(merge_coloring(layout, MergerMap((1, 2, 3, 1)))), args.scale)
    for bits in ("0000", "0101", "0011", "10110100"):
        word = [int(b) for b in bits]
        save(out, f"stripes_{bits}", io.color_pixels(bit_sequence_coloring(STRIPES_22, word, (24, 24))), args.scale)
        save(out, f"three_color_{bits}", io.color_pixels(bit_sequence_coloring(CHECKER_3, word, (24, 24))), args.scale)

    tree = tree_counterexample(0.0, 1.0, spine_extent_for_island(6))
    labels = {0.0: "a", 1.0: "b", 2.0: "c"}
    (out / "tree.txt").write_text(io.tree_text(tree.patch, [labels[float(x)] for x in tree.field.values]))
    r = refine_partition(tree.field)
    print(f"tree window: {tree.patch.size} vertices, {r.class_count} interior classes after refinement")
    print(f"wrote gallery to {out}/")


if __name__ == "__main__":
    main()
