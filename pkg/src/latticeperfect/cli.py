"""Batch command line: ``latticeperfect <command> [options]``.

Exit status 0 on success, 1 on a domain error (a JSON error record is
written to stderr), 2 on a usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .coloring import (
    IncompatibleMergerError,
    NotPerfectError,
    ValueField,
    aperiodicity_matrix,
    bareiss_determinant,
    extract_matrix,
    merge_coloring,
    merge_matrix,
    refine_partition,
    two_color_census,
    validate_matrix,
    verify_perfect,
)
from .dynamics import DivergenceError, integrate, perturb_relax, stationary_residual, tree_counterexample
from .generators import (
    Motif,
    bit_sequence_coloring,
    motif_tiling,
    path_coloring,
    periodic_lift,
    torus_search,
)
from .lattice import GridKind, PatchError, PeriodVectors
from .solver import Nonlinearity, SolverConfig, count_sweep, lift_solution, solve_all

GRIDS = [g.value for g in GridKind]


class DomainError(Exception):
    def __init__(self, message: str, **details):
        super().__init__(message)
        self.details = details


class UsageError(Exception):
    pass


# ----------------------------------------------------------------- helpers


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(";", ",").split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}") from None


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}") from None


def _bits(text: str) -> list[int]:
    if not text or set(text) - {"0", "1"}:
        raise argparse.ArgumentTypeError(f"expected a word over 0/1, got {text!r}")
    return [int(c) for c in text]


def _params(args: argparse.Namespace) -> dict:
    skip = {"func", "command"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _emit(args, payload: dict, inputs: dict[str, str] | None = None) -> None:
    payload = dict(payload)
    payload["manifest"] = io.manifest(args.command, _params(args), getattr(args, "seed", None), inputs or {})
    _write_text(args.out, io.dumps(payload))


def _write_text(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _load_matrix(args, attr: str = "matrix"):
    m = io.matrix_from_json(io.read_json(getattr(args, attr)))
    k = getattr(args, "k", None)
    if k is not None and k != m.k:
        raise DomainError(f"matrix k={m.k} does not match --k {k}")
    return m


def _nonlinearity(args) -> Nonlinearity:
    if args.poly is not None:
        return Nonlinearity.polynomial(args.poly)
    return Nonlinearity.nagumo(args.nagumo_a)


def _add_f(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--nagumo-a", type=float, default=0.4, help="detuning a of s(1-s)(s-a)")
    g.add_argument("--poly", type=_floats, help="polynomial coefficients, ascending degree")


def _add_solver(p: argparse.ArgumentParser) -> None:
    p.add_argument("--random-seeds", type=int, default=64)
    p.add_argument("--newton-tol", type=float, default=1e-12)
    p.add_argument("--dedup-tol", type=float, default=1e-8)
    p.add_argument("--stab-tol", type=float, default=1e-9)


def _solver_config(args, d: float) -> SolverConfig:
    return SolverConfig(
        d=d,
        newton_tol=args.newton_tol,
        dedup_tol=args.dedup_tol,
        stab_tol=args.stab_tol,
        random_seeds=args.random_seeds,
        rng_seed=args.seed,
    )


def _load_field(args) -> ValueField:
    if args.field:
        return io.field_from_json(io.read_json(args.field))
    if args.coloring and args.matrix and args.v is not None:
        c = io.coloring_from_json(io.read_json(args.coloring))
        return lift_solution(c, io.matrix_from_json(io.read_json(args.matrix)), args.v)
    raise UsageError("give --field, or --coloring with --matrix and --v")


# ---------------------------------------------------------------- commands


def cmd_validate_matrix(args):
    m = _load_matrix(args)
    rep = validate_matrix(m)
    _emit(args, {"admissible": rep.admissible, "messages": rep.messages()}, {"matrix": args.matrix})
    return 0 if rep.admissible else 1


def cmd_verify_coloring(args):
    c = io.coloring_from_json(io.read_json(args.coloring))
    m = _load_matrix(args)
    v = verify_perfect(c, m)
    _emit(
        args,
        {"perfect": v.perfect, "vertex": v.vertex, "expected": v.expected, "found": v.found},
        {"coloring": args.coloring, "matrix": args.matrix},
    )
    return 0 if v.perfect else 1


def cmd_extract_matrix(args):
    c = io.coloring_from_json(io.read_json(args.coloring))
    m = extract_matrix(c)
    _emit(args, io.matrix_to_json(m), {"coloring": args.coloring})
    return 0


def cmd_refine(args):
    if args.field:
        src = io.field_from_json(io.read_json(args.field))
    elif args.coloring:
        src = io.coloring_from_json(io.read_json(args.coloring))
    else:
        raise UsageError("refine needs --coloring or --field")
    r = refine_partition(src, tol=args.tol)
    _emit(
        args,
        {
            "class_count": r.class_count,
            "stabilized": r.stabilized,
            "iterations": r.iterations,
            "partition": r.partition.tolist(),
            "induced_matrix": None if r.induced_matrix is None else io.matrix_to_json(r.induced_matrix),
        },
        {"source": args.field or args.coloring},
    )
    return 0


def cmd_merge(args):
    m = _load_matrix(args)
    phi = io.merger_from_json(json.loads(args.phi) if args.phi.lstrip().startswith("[") else _ints(args.phi))
    out = {"merger": io.merger_to_json(phi), "matrix": io.matrix_to_json(merge_matrix(m, phi))}
    if args.coloring:
        c = io.coloring_from_json(io.read_json(args.coloring))
        out["coloring"] = io.coloring_to_json(merge_coloring(c, phi))
    _emit(args, out, {"matrix": args.matrix, "coloring": args.coloring})
    return 0


def cmd_aperiodicity(args):
    m = _load_matrix(args)
    det = bareiss_determinant(aperiodicity_matrix(m, args.grid))
    _emit(args, {"grid": args.grid, "determinant": det, "aperiodic": det == 0}, {"matrix": args.matrix})
    return 0


def cmd_census(args):
    verdict = two_color_census(args.grid, args.m11, args.m22)
    if args.out:
        _emit(args, {"grid": args.grid, "m11": args.m11, "m22": args.m22, "verdict": verdict.value})
    else:
        print(verdict.value)
    return 0


def cmd_make_path_coloring(args):
    m = _load_matrix(args)
    words = path_coloring(m)
    _write_text(args.out, "".join(" ".join(str(c) for c in w) + "\n" for w in words))
    return 0


def cmd_lift_periodic(args):
    periods = PeriodVectors(tuple(args.v1), tuple(args.v2))
    c, m = periodic_lift(args.grid, periods)
    _emit(args, {"coloring": io.coloring_to_json(c), "matrix": io.matrix_to_json(m)})
    return 0


def cmd_tile_motif(args):
    c = motif_tiling(args.grid, Motif.parse(args.motif), args.extents)
    out = {"coloring": io.coloring_to_json(c)}
    try:
        out["matrix"] = io.matrix_to_json(extract_matrix(c))
    except NotPerfectError as exc:
        out["matrix"] = None
        out["not_perfect"] = {"color": exc.color, "witnesses": list(exc.witnesses)}
    _emit(args, out)
    return 0


def cmd_bitword_coloring(args):
    m = _load_matrix(args)
    c = bit_sequence_coloring(m, args.bits, args.extents)
    v = verify_perfect(c, m)
    _emit(args, {"coloring": io.coloring_to_json(c), "interior_perfect": v.perfect}, {"matrix": args.matrix})
    return 0


def cmd_search_torus(args):
    m = _load_matrix(args)
    res = torus_search(args.grid, args.extents, m, limit=args.limit, point_symmetries=args.point_symmetries)
    _emit(
        args,
        {
            "count": len(res),
            "truncated": res.truncated,
            "nodes": res.nodes,
            "colorings": [c.colors.tolist() for c in res.colorings],
            "grid": res.colorings[0].patch.descriptor() if res.colorings else None,
        },
        {"matrix": args.matrix},
    )
    return 0


def cmd_solve(args):
    m = _load_matrix(args)
    s = solve_all(m, args.d, _nonlinearity(args), _solver_config(args, args.d))
    _emit(args, io.solutions_to_json(s), {"matrix": args.matrix})
    return 0


def cmd_sweep(args):
    m = _load_matrix(args)
    res = count_sweep(m, _nonlinearity(args), args.d_values, _solver_config(args, args.d_values[0]), args.refine)
    _emit(
        args,
        {"d_values": res.d_values, "counts": res.counts, "changes": [list(c) for c in res.changes]},
        {"matrix": args.matrix},
    )
    return 0


def cmd_lift_solution(args):
    c = io.coloring_from_json(io.read_json(args.coloring))
    m = _load_matrix(args)
    if args.solutions:
        recs = io.solutions_from_json(io.read_json(args.solutions)).records
        if not 0 <= args.index < len(recs):
            raise DomainError(f"record index {args.index} out of range 0..{len(recs) - 1}")
        v = recs[args.index].v
    elif args.v is not None:
        v = args.v
    else:
        raise UsageError("give --v or --solutions with --index")
    u = lift_solution(c, m, v)
    _emit(args, io.field_to_json(u), {"coloring": args.coloring, "matrix": args.matrix, "solutions": args.solutions})
    return 0


def cmd_simulate(args):
    u = _load_field(args)
    f = _nonlinearity(args)
    stats = integrate(u, args.d, f, args.T, args.dt)
    _emit(
        args,
        {
            "field": io.field_to_json(stats.final_field),
            "max_drift": stats.max_drift,
            "final_residual": stats.final_residual,
            "steps": stats.steps,
            "dt": stats.dt,
            "min_value": stats.min_value,
            "max_value": stats.max_value,
        },
        {"field": args.field, "coloring": args.coloring, "matrix": args.matrix},
    )
    return 0


def cmd_probe_stability(args):
    u = _load_field(args)
    f = _nonlinearity(args)
    verdict = perturb_relax(u, args.d, f, args.eps, args.trials, args.T, rng_seed=args.seed)
    _emit(
        args,
        {"verdict": verdict, "residual": stationary_residual(u, args.d, f)},
        {"field": args.field, "coloring": args.coloring, "matrix": args.matrix},
    )
    return 0


def cmd_tree_example(args):
    t = tree_counterexample(args.a, args.b, args.depth, args.branch_depth)
    res = stationary_residual(t.field, 1.0, t.nonlinearity)
    _emit(
        args,
        {
            "values": list(t.values),
            "f_coefficients": list(t.f_coefficients),
            "residual": res,
            "field": io.field_to_json(t.field),
        },
    )
    return 0


def cmd_render(args):
    inputs = {}
    if args.coloring:
        data = io.read_json(args.coloring)
        c = io.coloring_from_json(data.get("coloring", data))
        inputs["coloring"] = args.coloring
        patch, labels = c.patch, c.colors.tolist()
        pixels = None if patch.kind == GridKind.BINARY_TREE else io.color_pixels(c)
    elif args.field:
        data = io.read_json(args.field)
        u = io.field_from_json(data.get("field", data))
        inputs["field"] = args.field
        patch, labels = u.patch, [repr(float(x)) for x in u.values]
        pixels = None if patch.kind == GridKind.BINARY_TREE else io.field_pixels(u)
    else:
        raise UsageError("render needs --coloring or --field")
    out = Path(args.out)
    if pixels is None:
        out.write_text(io.tree_text(patch, labels), encoding="utf-8")
    else:
        out.write_bytes(io.ppm_bytes(pixels, args.scale))
        if args.svg:
            Path(args.svg).write_text(io.svg_text(pixels, args.scale), encoding="utf-8")
    man = io.manifest(args.command, _params(args), None, inputs)
    man["outputs"] = {str(out): io.sha256_file(out)}
    if args.svg and pixels is not None:
        man["outputs"][args.svg] = io.sha256_file(args.svg)
    Path(str(out) + ".manifest.json").write_text(io.dumps(man), encoding="utf-8")
    return 0


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    from . import __version__

    parser = argparse.ArgumentParser(prog="latticeperfect", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--seed", type=int, default=0, help="rng seed")
        return p

    p = add("validate-matrix", cmd_validate_matrix, "row sums and sign symmetry of a coloring matrix")
    p.add_argument("--matrix", required=True)
    p.add_argument("--k", type=int)

    p = add("verify-coloring", cmd_verify_coloring, "check a coloring against a matrix")
    p.add_argument("--coloring", required=True)
    p.add_argument("--matrix", required=True)

    p = add("extract-matrix", cmd_extract_matrix, "read the matrix off a perfect coloring")
    p.add_argument("--coloring", required=True)

    p = add("refine", cmd_refine, "coarsest equitable refinement")
    p.add_argument("--coloring")
    p.add_argument("--field")
    p.add_argument("--tol", type=float, default=1e-8)

    p = add("merge", cmd_merge, "merge colors of a matrix (and optionally a coloring)")
    p.add_argument("--matrix", required=True)
    p.add_argument("--phi", required=True, help="targets, e.g. 1,2,2,1 or a JSON array")
    p.add_argument("--coloring")

    p = add("aperiodicity", cmd_aperiodicity, "determinant test for aperiodic colorings")
    p.add_argument("--matrix", required=True)
    p.add_argument("--grid", required=True, choices=["square", "triangular", "hexagonal"])

    p = add("census", cmd_census, "two-color census lookup")
    p.add_argument("--grid", required=True, choices=["square", "triangular", "hexagonal"])
    p.add_argument("--m11", type=int, required=True)
    p.add_argument("--m22", type=int, required=True)

    p = add("make-path-coloring", cmd_make_path_coloring, "periodic words on the path")
    p.add_argument("--matrix", required=True)

    p = add("lift-periodic", cmd_lift_periodic, "perfect coloring from two period vectors")
    p.add_argument("--grid", required=True, choices=["square", "triangular", "hexagonal"])
    p.add_argument("--v1", type=_ints, required=True)
    p.add_argument("--v2", type=_ints, required=True)

    p = add("tile-motif", cmd_tile_motif, "tile a rectangular motif on a torus")
    p.add_argument("--grid", required=True, choices=["square", "triangular", "hexagonal"])
    p.add_argument("--motif", required=True, help="rows separated by ';', e.g. 1,2;3,4")
    p.add_argument("--extents", type=_ints, required=True)

    p = add("bitword-coloring", cmd_bitword_coloring, "aperiodic-family coloring driven by a bit word")
    p.add_argument("--matrix", required=True)
    p.add_argument("--bits", type=_bits, required=True)
    p.add_argument("--extents", type=_ints, default=[16, 16])

    p = add("search-torus", cmd_search_torus, "backtracking search for perfect colorings of a torus")
    p.add_argument("--grid", required=True, choices=["square", "triangular", "hexagonal"])
    p.add_argument("--extents", type=_ints, required=True)
    p.add_argument("--matrix", required=True)
    p.add_argument("--limit", type=int, default=1000)
    p.add_argument("--point-symmetries", action="store_true")

    p = add("solve", cmd_solve, "all roots of the finite stationary system")
    p.add_argument("--matrix", required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--d", type=float, required=True)
    _add_f(p)
    _add_solver(p)

    p = add("sweep", cmd_sweep, "solution counts along a grid of d values")
    p.add_argument("--matrix", required=True)
    p.add_argument("--d-values", type=_floats, required=True)
    p.add_argument("--refine", action="store_true", help="bisect count changes to width 1e-3")
    _add_f(p)
    _add_solver(p)

    p = add("lift-solution", cmd_lift_solution, "lift a solution vector to a lattice field")
    p.add_argument("--coloring", required=True)
    p.add_argument("--matrix", required=True)
    p.add_argument("--v", type=_floats)
    p.add_argument("--solutions")
    p.add_argument("--index", type=int, default=0)

    for name, func, help_ in (
        ("simulate", cmd_simulate, "integrate the lattice equation with RK4"),
        ("probe-stability", cmd_probe_stability, "perturb a stationary field and relax"),
    ):
        p = add(name, func, help_)
        p.add_argument("--field")
        p.add_argument("--coloring")
        p.add_argument("--matrix")
        p.add_argument("--v", type=_floats)
        p.add_argument("--d", type=float, required=True)
        p.add_argument("--T", type=float, default=200.0)
        p.add_argument("--dt", type=float, default=0.5)
        _add_f(p)
        if name == "probe-stability":
            p.add_argument("--eps", type=float, default=1e-3)
            p.add_argument("--trials", type=int, default=5)

    p = add("tree-example", cmd_tree_example, "stationary non-perfect field on the binary tree")
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--depth", type=int, default=20, help="spine half-length")
    p.add_argument("--branch-depth", type=int, default=3)

    p = add("render", cmd_render, "PPM (and optional SVG) image of a coloring or field")
    p.add_argument("--coloring")
    p.add_argument("--field")
    p.add_argument("--svg")
    p.add_argument("--scale", type=int, default=8)
    p.set_defaults(out=None)
    for action in p._actions:
        if action.dest == "out":
            action.required = True
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"latticeperfect {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        return _domain_error(args, "FileNotFoundError", str(exc), {})
    except DomainError as exc:
        return _domain_error(args, "DomainError", str(exc), exc.details)
    except NotPerfectError as exc:
        return _domain_error(args, "NotPerfectError", str(exc), {"color": exc.color, "witnesses": list(exc.witnesses)})
    except IncompatibleMergerError as exc:
        return _domain_error(args, "IncompatibleMergerError", str(exc), {"sources": list(exc.sources)})
    except (ValueError, PatchError, DivergenceError) as exc:
        return _domain_error(args, type(exc).__name__, str(exc), {})


def _domain_error(args, kind: str, message: str, details: dict) -> int:
    record = {"error": kind, "command": args.command, "message": message, "details": details}
    sys.stderr.write(json.dumps(record, default=str) + "\n")
    return 1


if __name__ == "__main__":
    sys.exit(main())
