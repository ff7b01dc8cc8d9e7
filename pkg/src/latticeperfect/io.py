"""JSON formats, run manifests and image rendering.

Formats::

    matrix     {"n": int, "k": int, "rows": [[int]]}
    coloring   {"grid": {"kind", "dims", "wrap"}, "colors": [int]}      (vertex order)
    field      {"grid": {...}, "values": [float]}
    solutions  {"matrix": ..., "nonlinearity": ..., "config": ..., "records": [...], "note": str}
    merger     [int]

Floats are written with ``repr`` so every value round-trips exactly.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .coloring import Coloring, ColoringMatrix, MergerMap, ValueField
from .lattice import GridKind, Patch, build_patch
from .solver import Nonlinearity, SolutionRecord, SolutionSet, SolverConfig


class FormatError(ValueError):
    pass


def dumps(obj: Any) -> str:
    return json.dumps(obj, separators=(",", ":"), allow_nan=False) + "\n"


def _unwrap(data, key: str, marker: str):
    """Accept command outputs that carry the object under ``key`` next to other results."""
    if isinstance(data, dict) and marker not in data and isinstance(data.get(key), dict):
        return data[key]
    return data


def _require(data: dict, *keys: str, what: str) -> None:
    if not isinstance(data, dict):
        raise FormatError(f"{what}: expected a JSON object")
    missing = [k for k in keys if k not in data]
    if missing:
        raise FormatError(f"{what}: missing keys {missing}")


# ------------------------------------------------------------------ matrix


def matrix_to_json(m: ColoringMatrix) -> dict:
    return {"n": m.n, "k": m.k, "rows": [list(r) for r in m.rows]}


def matrix_from_json(data) -> ColoringMatrix:
    if isinstance(data, list):
        return ColoringMatrix.of(data)
    data = _unwrap(data, "matrix", "rows")
    _require(data, "rows", what="matrix")
    m = ColoringMatrix.of(data["rows"], data.get("k"))
    if "n" in data and int(data["n"]) != m.n:
        raise FormatError(f"matrix: n={data['n']} but {m.n} rows given")
    return m


# ---------------------------------------------------------------- patches


def patch_from_descriptor(grid: dict) -> Patch:
    _require(grid, "kind", "dims", what="grid")
    wrap = grid.get("wrap", True)
    return build_patch(GridKind.parse(grid["kind"]), grid["dims"], wrap)


def coloring_to_json(c: Coloring) -> dict:
    return {"grid": c.patch.descriptor(), "n": c.n, "colors": c.colors.tolist()}


def coloring_from_json(data: dict) -> Coloring:
    data = _unwrap(data, "coloring", "colors")
    _require(data, "grid", "colors", what="coloring")
    patch = patch_from_descriptor(data["grid"])
    colors = data["colors"]
    if colors and isinstance(colors[0], list):  # row-major 2D grid
        colors = [c for row in colors for c in row]
    if len(colors) != patch.size:
        raise FormatError(f"coloring: {len(colors)} colors for {patch.size} vertices")
    return Coloring.of(patch, colors, data.get("n"))


def field_to_json(u: ValueField) -> dict:
    return {"grid": u.patch.descriptor(), "values": [float(x) for x in u.values]}


def field_from_json(data: dict) -> ValueField:
    data = _unwrap(data, "field", "values")
    _require(data, "grid", "values", what="field")
    patch = patch_from_descriptor(data["grid"])
    values = np.asarray(data["values"], dtype=float).reshape(-1)
    if values.shape[0] != patch.size:
        raise FormatError(f"field: {values.shape[0]} values for {patch.size} vertices")
    return ValueField(patch, values)


def merger_from_json(data) -> MergerMap:
    if isinstance(data, dict):
        data = data.get("targets")
    if not isinstance(data, list):
        raise FormatError("merger: expected a JSON array")
    return MergerMap(tuple(data))


def merger_to_json(phi: MergerMap) -> list[int]:
    return list(phi.targets)


# -------------------------------------------------------------- solutions


def nonlinearity_from_json(data: dict) -> Nonlinearity:
    if data.get("form") == "nagumo":
        return Nonlinearity.nagumo(data["a"])
    return Nonlinearity.polynomial(data["coefficients"])


def solutions_to_json(s: SolutionSet) -> dict:
    return {
        "matrix": matrix_to_json(s.matrix),
        "nonlinearity": s.nonlinearity.describe(),
        "config": s.config_echo(),
        "count": len(s.records),
        "records": [r.as_dict() for r in s.records],
        "note": s.completeness_note,
    }


def solutions_from_json(data: dict) -> SolutionSet:
    _require(data, "matrix", "nonlinearity", "config", "records", what="solution set")
    records = [
        SolutionRecord(tuple(float(x) for x in r["v"]), float(r["residual"]), float(r["abscissa"]), r["verdict"])
        for r in data["records"]
    ]
    return SolutionSet(
        matrix_from_json(data["matrix"]),
        nonlinearity_from_json(data["nonlinearity"]),
        SolverConfig(**data["config"]),
        records,
        data.get("note", ""),
    )


# --------------------------------------------------------------- manifest


def sha256_file(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def manifest(command: str, params: dict, seed: int | None, inputs: dict[str, str]) -> dict:
    """Run record embedded in every output; no clock or host data so reruns are byte-identical."""
    return {
        "command": command,
        "params": params,
        "version": __version__,
        "seed": seed,
        "inputs": {k: sha256_file(p) for k, p in sorted(inputs.items()) if p},
    }


def read_json(path: str | Path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


# -------------------------------------------------------------- rendering

# color 1 white, 2 black, 3 gray, then a fixed qualitative set
PALETTE = (
    (255, 255, 255),
    (0, 0, 0),
    (128, 128, 128),
    (230, 25, 75),
    (60, 180, 75),
    (0, 130, 200),
    (255, 225, 25),
    (245, 130, 48),
    (145, 30, 180),
    (70, 240, 240),
    (240, 50, 230),
    (170, 110, 40),
    (0, 128, 128),
    (128, 0, 0),
    (170, 255, 195),
    (0, 0, 128),
)


def _as_rows(patch: Patch, per_vertex: np.ndarray) -> np.ndarray:
    """(H, W) array with image row 0 at the top, i.e. the largest y."""
    if patch.kind == GridKind.PATH:
        return per_vertex.reshape(1, -1)
    if not patch.kind.is_2d:
        raise ValueError(f"cannot render a {patch.kind.value} patch as an image")
    width, height = patch.dims
    return per_vertex.reshape(height, width)[::-1]


def color_pixels(c: Coloring) -> np.ndarray:
    if c.n > len(PALETTE):
        raise ValueError(f"palette has {len(PALETTE)} entries, coloring uses {c.n}")
    lut = np.array(PALETTE, dtype=np.uint8)
    return lut[_as_rows(c.patch, c.colors - 1)]


def field_pixels(u: ValueField) -> np.ndarray:
    vals = _as_rows(u.patch, np.asarray(u.values, dtype=float))
    lo, hi = float(vals.min()), float(vals.max())
    scaled = np.zeros_like(vals) if hi <= lo else (vals - lo) / (hi - lo)
    gray = np.round(scaled * 255).astype(np.uint8)
    return np.repeat(gray[..., None], 3, axis=2)


def ppm_bytes(pixels: np.ndarray, scale: int = 8) -> bytes:
    img = np.kron(pixels, np.ones((scale, scale, 1), dtype=np.uint8)) if scale > 1 else pixels
    h, w, _ = img.shape
    return f"P6\n{w} {h}\n255\n".encode("ascii") + img.astype(np.uint8).tobytes()


def svg_text(pixels: np.ndarray, scale: int = 8) -> str:
    h, w, _ = pixels.shape
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w * scale}" height="{h * scale}">',
    ]
    for r in range(h):
        for c in range(w):
            red, green, blue = (int(x) for x in pixels[r, c])
            out.append(
                f'<rect x="{c * scale}" y="{r * scale}" width="{scale}" height="{scale}" '
                f'fill="#{red:02x}{green:02x}{blue:02x}"/>'
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def tree_text(patch: Patch, labels) -> str:
    """Indented listing: each spine vertex followed by its hanging branch."""
    labels = list(labels)
    children: dict[int, list[int]] = {i: [] for i in range(patch.size)}
    for i, (s, t, p) in enumerate(patch.coords):
        if t > 0:
            children[patch.neighbor_lists[i][0]].append(i)
    lines = []

    def walk(i: int, depth: int):
        s, t, p = patch.coords[i]
        tag = f"{s}" if t == 0 else f"{s}.{t}.{p}"
        lines.append("  " * depth + f"{tag}: {labels[i]}")
        for j in children[i]:
            if patch.coords[j][1] > t:
                walk(j, depth + 1)

    for i, (s, t, p) in enumerate(patch.coords):
        if t == 0:
            walk(i, 0)
    return "\n".join(lines) + "\n"
