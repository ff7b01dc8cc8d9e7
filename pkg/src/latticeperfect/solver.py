"""Roots and stability of the finite stationary system d(Mv - kv) + F(v) = 0."""
from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .coloring import (
    VALUE_TOL,
    Coloring,
    ColoringMatrix,
    MergerMap,
    ValueField,
    compatible_mergers,
    merge_matrix,
    verify_perfect,
)


@dataclass(frozen=True)
class Nonlinearity:
    """Polynomial reaction term, coefficients in ascending degree."""

    coefficients: tuple[float, ...]
    nagumo_a: float | None = None

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coefficients)
        while len(coeffs) > 1 and coeffs[-1] == 0.0:
            coeffs = coeffs[:-1]
        if len(coeffs) < 2:
            raise ValueError("reaction polynomial must have degree >= 1")
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def nagumo(cls, a: float) -> "Nonlinearity":
        """f(s) = s (1 - s) (s - a) = -a s + (1 + a) s^2 - s^3."""
        a = float(a)
        if not 0.0 < a < 1.0:
            raise ValueError("nagumo detuning must lie in (0, 1)")
        return cls((0.0, -a, 1.0 + a, -1.0), nagumo_a=a)

    @classmethod
    def polynomial(cls, coefficients: Sequence[float]) -> "Nonlinearity":
        return cls(tuple(coefficients))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, s):
        if self.nagumo_a is not None:
            # factored form vanishes exactly at 0, a and 1
            s = np.asarray(s, dtype=float)
            return s * (1.0 - s) * (s - self.nagumo_a)
        return np.polynomial.polynomial.polyval(s, self.coefficients)

    def derivative(self, s):
        return np.polynomial.polynomial.polyval(s, np.polynomial.polynomial.polyder(self.coefficients))

    def real_roots(self, tol: float = 1e-10) -> list[float]:
        """Real roots, polished by Newton and deduplicated."""
        if self.nagumo_a is not None:
            return sorted({0.0, self.nagumo_a, 1.0})
        roots = np.polynomial.polynomial.polyroots(self.coefficients)
        scale = max(1.0, float(np.max(np.abs(roots)))) if roots.size else 1.0
        out: list[float] = []
        for z in roots:
            if abs(z.imag) > 1e-7 * scale:
                continue
            x = float(z.real)
            for _ in range(50):
                dfx = float(self.derivative(x))
                if dfx == 0.0:
                    break
                dx = float(self(x)) / dfx
                x -= dx
                if abs(dx) < 1e-16 * max(1.0, abs(x)):
                    break
            if all(abs(x - y) > tol for y in out):
                out.append(x)
        return sorted(out)

    def describe(self) -> dict:
        if self.nagumo_a is not None:
            return {"form": "nagumo", "a": self.nagumo_a}
        return {"form": "polynomial", "coefficients": list(self.coefficients)}


@dataclass
class SolverConfig:
    d: float = 0.005
    newton_tol: float = 1e-12
    max_iter: int = 100
    dedup_tol: float = 1e-8
    stab_tol: float = 1e-9
    random_seeds: int = 64
    structured_seeds: bool = True
    rng_seed: int = 0
    workers: int | None = None

    def __post_init__(self):
        if self.d <= 0:
            raise ValueError("diffusion parameter must be positive")
        if min(self.newton_tol, self.dedup_tol, self.stab_tol) <= 0:
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class SolutionRecord:
    v: tuple[float, ...]
    residual_norm: float
    spectral_abscissa: float
    verdict: str

    def as_dict(self) -> dict:
        return {
            "v": list(self.v),
            "residual": self.residual_norm,
            "abscissa": self.spectral_abscissa,
            "verdict": self.verdict,
        }


@dataclass
class SolutionSet:
    matrix: ColoringMatrix
    nonlinearity: Nonlinearity
    config: SolverConfig
    records: list[SolutionRecord] = field(default_factory=list)
    completeness_note: str = ""

    def __len__(self) -> int:
        return len(self.records)

    def vectors(self) -> np.ndarray:
        return np.array([r.v for r in self.records], dtype=float).reshape(len(self.records), self.matrix.n)

    def config_echo(self) -> dict:
        cfg = asdict(self.config)
        cfg.pop("workers", None)
        return cfg


def _check(matrix: ColoringMatrix, v) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.shape[0] != matrix.n:
        raise ValueError(f"vector of length {v.shape[0]} for a {matrix.n}-color matrix")
    return v


def residual(matrix: ColoringMatrix, d: float, f: Nonlinearity, v) -> np.ndarray:
    v = _check(matrix, v)
    return d * (matrix.array() @ v - matrix.k * v) + f(v)


def jacobian(matrix: ColoringMatrix, d: float, f: Nonlinearity, v) -> np.ndarray:
    v = _check(matrix, v)
    return d * (matrix.array() - matrix.k * np.eye(matrix.n)) + np.diag(f.derivative(v))


def newton(
    fun: Callable[[np.ndarray], np.ndarray],
    jac: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    tol: float = 1e-12,
    max_iter: int = 100,
    bound: float = 1e6,
) -> tuple[np.ndarray, float, bool]:
    """Damped Newton with backtracking on the squared residual norm."""
    x = np.array(x0, dtype=float)
    r = fun(x)
    nr = float(np.max(np.abs(r)))
    for _ in range(max_iter):
        if nr <= tol:
            return x, nr, True
        try:
            step = np.linalg.solve(jac(x), -r)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(jac(x), -r, rcond=None)[0]
        phi0 = float(r @ r)
        t = 1.0
        while True:
            xn = x + t * step
            rn = fun(xn)
            if float(rn @ rn) <= (1.0 - 1e-4 * t) * phi0 or t < 1e-10:
                break
            t *= 0.5
        x, r = xn, rn
        nr = float(np.max(np.abs(r)))
        if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > bound:
            return x, nr, False
    return x, nr, nr <= tol


def spectral_abscissa(a: np.ndarray) -> float:
    return float(np.max(np.linalg.eigvals(a).real))


def classify(abscissa: float, stab_tol: float = 1e-9) -> str:
    if abscissa < -stab_tol:
        return "stable"
    if abscissa > stab_tol:
        return "unstable"
    return "marginal"


def stability(
    matrix: ColoringMatrix, d: float, f: Nonlinearity, v, stab_tol: float = 1e-9
) -> SolutionRecord:
    v = _check(matrix, v)
    res = float(np.max(np.abs(residual(matrix, d, f, v))))
    ab = spectral_abscissa(jacobian(matrix, d, f, v))
    return SolutionRecord(tuple(float(x) for x in v), res, ab, classify(ab, stab_tol))


def seed_points(matrix: ColoringMatrix, f: Nonlinearity, config: SolverConfig) -> np.ndarray:
    """Root-tuple grid of f (anti-continuum seeds) plus uniform random points."""
    n = matrix.n
    roots = f.real_roots()
    seeds = []
    if config.structured_seeds and roots:
        seeds.extend(itertools.product(roots, repeat=n))
    if roots:
        lo, hi = min(roots) - 0.5, max(roots) + 0.5
    else:
        lo, hi = -2.0, 2.0
    rng = np.random.default_rng(config.rng_seed)
    if config.random_seeds:
        seeds.extend(rng.uniform(lo, hi, size=(config.random_seeds, n)))
    return np.array(seeds, dtype=float).reshape(-1, n)


def worker_count(requested: int | None = None) -> int:
    cap = os.environ.get("LATTICEPERFECT_THREADS")
    count = 1 if requested is None else int(requested)
    if cap:
        count = min(count, max(1, int(cap)))
    return max(1, count)


def dedup(points: Sequence[np.ndarray], tol: float) -> list[np.ndarray]:
    """Keep one representative per l-inf cluster, in input order."""
    kept: list[np.ndarray] = []
    for p in points:
        if all(np.max(np.abs(p - q)) > tol for q in kept):
            kept.append(p)
    return kept


def solve_all(
    matrix: ColoringMatrix, d: float, f: Nonlinearity, config: SolverConfig | None = None
) -> SolutionSet:
    """Multistart Newton enumeration of the roots of the finite stationary system.

    The enumeration is heuristic: it is expected to be complete only close
    to the anti-continuum limit, where every root sits near a tuple of
    roots of f.
    """
    config = SolverConfig(d=d) if config is None else config
    if config.d != d:
        config = SolverConfig(**{**asdict(config), "d": d})
    a = matrix.array().astype(float)
    k = matrix.k
    n = matrix.n
    lap = d * (a - k * np.eye(n))

    def fun(v):
        return lap @ v + f(v)

    def jac(v):
        return lap + np.diag(f.derivative(v))

    seeds = seed_points(matrix, f, config)

    def run(x0):
        return newton(fun, jac, x0, config.newton_tol, config.max_iter)

    workers = worker_count(config.workers)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, seeds))
    else:
        results = [run(s) for s in seeds]
    converged = [x for x, nr, ok in results if ok]
    converged.sort(key=lambda x: tuple(np.round(x, 9)))
    roots = dedup(converged, config.dedup_tol)
    records = [stability(matrix, d, f, x, config.stab_tol) for x in roots]
    records.sort(key=lambda r: r.v)
    n_struct = len(f.real_roots()) ** n if config.structured_seeds else 0
    note = (
        f"{len(seeds)} seeds ({n_struct} root-grid, {config.random_seeds} random, rng seed "
        f"{config.rng_seed}); {len(converged)} converged; {len(records)} distinct roots. "
        "Multistart enumeration is heuristic; completeness is only expected near the "
        "anti-continuum limit d -> 0."
    )
    return SolutionSet(matrix, f, config, records, note)


def lift_solution(coloring: Coloring, matrix: ColoringMatrix, v) -> ValueField:
    """u_i = v[color(i)] on the patch of a verified perfect coloring."""
    verdict = verify_perfect(coloring, matrix)
    if not verdict:
        raise ValueError(f"coloring is not perfect for this matrix (vertex {verdict.vertex})")
    v = _check(matrix, v)
    return ValueField(coloring.patch, v[coloring.colors - 1])


def lift_via_merger(
    v1,
    phi: MergerMap,
    matrix: ColoringMatrix | None = None,
    d: float | None = None,
    f: Nonlinearity | None = None,
    tol: float = 1e-10,
) -> np.ndarray:
    """Copy coarse values to the fine colors: (v2)_i = v1[phi(i)].

    When the fine ``matrix`` (with ``d`` and ``f``) is given, the merger must
    be compatible and ``v1`` must solve the merged system to ``tol``.
    """
    v1 = np.asarray(v1, dtype=float).reshape(-1)
    if v1.shape[0] != phi.ell:
        raise ValueError(f"coarse vector has length {v1.shape[0]}, merger targets {phi.ell} colors")
    if matrix is not None:
        coarse = merge_matrix(matrix, phi)
        if d is not None and f is not None:
            r = float(np.max(np.abs(residual(coarse, d, f, v1))))
            if r > tol:
                raise ValueError(f"coarse vector does not solve the merged system (residual {r:.3g})")
    return v1[np.array(phi.targets) - 1]


def value_partition(v, tol: float = VALUE_TOL) -> tuple[tuple[int, ...], ...]:
    """Blocks of equal entries (1-based color indices), ordered by first member."""
    v = np.asarray(v, dtype=float)
    blocks: list[list[int]] = []
    for i, x in enumerate(v):
        for b in blocks:
            if abs(v[b[0] - 1] - x) <= tol:
                b.append(i + 1)
                break
        else:
            blocks.append([i + 1])
    return tuple(tuple(b) for b in blocks)


def merger_breakdown(solutions: SolutionSet, tol: float = VALUE_TOL) -> dict[tuple, int]:
    """Count roots by the coarsest compatible merger that reproduces their equal-value pattern.

    Keys are set partitions of the colors; roots whose pattern is not a
    compatible merger (in particular all-distinct ones) fall under ``()``.
    """
    compatible = {tuple(tuple(b) for b in phi.blocks()) for phi, _ in compatible_mergers(solutions.matrix)}
    out: dict[tuple, int] = {}
    for rec in solutions.records:
        part = value_partition(rec.v, tol)
        key = part if part in compatible else ()
        out[key] = out.get(key, 0) + 1
    return out


@dataclass
class SweepResult:
    d_values: list[float]
    counts: list[int]
    solutions: list[SolutionSet] = field(repr=False)
    changes: list[tuple[float, float]]


def count_sweep(
    matrix: ColoringMatrix,
    f: Nonlinearity,
    d_values: Sequence[float],
    config: SolverConfig | None = None,
    refine: bool = False,
    width: float = 1e-3,
) -> SweepResult:
    """Solution counts along a d grid; brackets where the count changes.

    With ``refine`` each bracket is bisected on the count itself down to
    ``width``.
    """
    config = SolverConfig() if config is None else config
    sets = [solve_all(matrix, d, f, config) for d in d_values]
    counts = [len(s) for s in sets]
    changes = []
    for (d0, c0), (d1, c1) in zip(zip(d_values, counts), zip(d_values[1:], counts[1:])):
        if c0 == c1:
            continue
        if refine:
            def pred(d, c0=c0):
                return len(solve_all(matrix, d, f, config)) == c0

            lo, hi = bisect_transition(pred, d0, d1, width)
            changes.append((lo, hi))
        else:
            changes.append((min(d0, d1), max(d0, d1)))
    return SweepResult(list(d_values), counts, sets, changes)


def bisect_transition(
    same_as_first: Callable[[float], bool], d0: float, d1: float, width: float = 1e-3
) -> tuple[float, float]:
    """Shrink ``[d0, d1]`` around the point where ``same_as_first`` flips."""
    a, b = float(d0), float(d1)
    while abs(b - a) > width:
        mid = 0.5 * (a + b)
        if same_as_first(mid):
            a = mid
        else:
            b = mid
    return min(a, b), max(a, b)


def has_heterogeneous_pair(solutions: SolutionSet, center: float = 0.5, gap: float = 1e-6) -> bool:
    """Is there a root with v1 in (0, center) and v2 in (center, 1), away from the center?"""
    for rec in solutions.records:
        v1, v2 = rec.v[0], rec.v[1]
        if 0.0 < v1 < center - gap and center + gap < v2 < 1.0:
            return True
    return False
