"""Time integration of the lattice equation and the binary-tree counterexample."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .coloring import ValueField
from .lattice import GridKind, Patch, build_patch
from .solver import Nonlinearity


class DivergenceError(RuntimeError):
    pass


def _laplacian_parts(patch: Patch):
    nbr = patch.neighbor_array()
    interior = np.asarray(patch.interior)
    idx = np.nonzero(interior)[0]
    return idx, nbr[idx], patch.degree


def vector_field(patch: Patch, d: float, f: Nonlinearity):
    """u -> du/dt on interior vertices, zero on the (frozen) boundary."""
    idx, nb, k = _laplacian_parts(patch)

    def rhs(u: np.ndarray) -> np.ndarray:
        out = np.zeros_like(u)
        ui = u[idx]
        out[idx] = d * (u[nb].sum(axis=1) - k * ui) + f(ui)
        return out

    return rhs


def stationary_residual(fld: ValueField, d: float, f: Nonlinearity) -> float:
    """Max over interior vertices of |d * sum_j (u_j - u_i) + f(u_i)|."""
    idx, nb, k = _laplacian_parts(fld.patch)
    if idx.size == 0:
        return 0.0
    u = fld.values
    r = d * (u[nb].sum(axis=1) - k * u[idx]) + f(u[idx])
    return float(np.max(np.abs(r)))


@dataclass(frozen=True, eq=False)
class TrajectoryStats:
    final_field: ValueField = field(repr=False)
    max_drift: float
    final_residual: float
    steps: int
    dt: float
    min_value: float
    max_value: float


def lipschitz_bound(f: Nonlinearity, lo: float, hi: float) -> float:
    xs = np.linspace(lo, hi, 257)
    return float(np.max(np.abs(f.derivative(xs))))


def stable_step(patch: Patch, d: float, f: Nonlinearity, u: np.ndarray) -> float:
    lo, hi = float(np.min(u)), float(np.max(u))
    if hi - lo < 1e-3:
        lo, hi = lo - 0.5, hi + 0.5
    return 1.0 / (4.0 * d * patch.degree + lipschitz_bound(f, lo, hi))


def integrate(
    fld: ValueField, d: float, f: Nonlinearity, T: float, dt: float = 0.1, blowup: float = 1e6
) -> TrajectoryStats:
    """Classical RK4 on [0, T]; the step is shrunk below 1/(4dk + L_f) when needed."""
    if dt <= 0 or T <= 0:
        raise ValueError("T and dt must be positive")
    rhs = vector_field(fld.patch, d, f)
    u0 = np.array(fld.values, dtype=float)
    h = min(dt, stable_step(fld.patch, d, f, u0))
    steps = max(1, math.ceil(T / h - 1e-12))
    h = T / steps
    u = u0.copy()
    drift = 0.0
    lo, hi = float(u.min()), float(u.max())
    for _ in range(steps):
        k1 = rhs(u)
        k2 = rhs(u + 0.5 * h * k1)
        k3 = rhs(u + 0.5 * h * k2)
        k4 = rhs(u + h * k3)
        u = u + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(u)) or np.max(np.abs(u)) > blowup:
            raise DivergenceError("trajectory left the |u| <= 1e6 region")
        drift = max(drift, float(np.max(np.abs(u - u0))))
        lo, hi = min(lo, float(u.min())), max(hi, float(u.max()))
    final = ValueField(fld.patch, u)
    return TrajectoryStats(final, drift, stationary_residual(final, d, f), steps, h, lo, hi)


def perturb_relax(
    fld: ValueField,
    d: float,
    f: Nonlinearity,
    eps: float = 1e-3,
    trials: int = 5,
    T: float = 200.0,
    dt: float = 0.5,
    rng_seed: int = 0,
    escape_radius: float = 0.1,
) -> str:
    """Empirical stability: 'returned', 'escaped' or 'inconclusive'."""
    base_res = stationary_residual(fld, d, f)
    if base_res > 1e-8:
        raise ValueError(f"field is not stationary (residual {base_res:.3g})")
    rng = np.random.default_rng(rng_seed)
    interior = np.asarray(fld.patch.interior)
    u0 = np.asarray(fld.values)
    returned = True
    for _ in range(trials):
        kick = rng.uniform(-eps, eps, size=u0.shape) * interior
        start = ValueField(fld.patch, u0 + kick)
        res0 = stationary_residual(start, d, f)
        try:
            stats = integrate(start, d, f, T, dt)
        except DivergenceError:
            return "escaped"
        dist = float(np.max(np.abs(stats.final_field.values - u0)))
        if dist > escape_radius:
            return "escaped"
        if dist > 10 * eps or stats.final_residual >= res0:
            returned = False
    return "returned" if returned else "inconclusive"


# ------------------------------------------------------------- tree example


@dataclass(frozen=True, eq=False)
class TreeCounterexample:
    patch: Patch
    field: ValueField = field(repr=False)
    f_coefficients: tuple[float, float, float]
    values: tuple[float, float, float]

    @property
    def nonlinearity(self) -> Nonlinearity:
        return Nonlinearity.polynomial(self.f_coefficients)


def _island_positions(limit: int) -> set[int]:
    out = set()
    n = 0
    while n * (n + 9) // 2 <= limit + 1:
        out.add(n * (n + 9) // 2)
        n += 1
    return out


def spine_symbol(s: int, a_positions: set[int]) -> str:
    s = abs(s)
    if s in a_positions:
        return "a"
    if s + 1 in a_positions or s - 1 in a_positions:
        return "b"
    return "c"


def spine_extent_for_island(length: int) -> int:
    """Spine half-length whose window just contains the c-island of ``length`` (>= 2)."""
    if length < 2:
        raise ValueError("islands have length >= 2")
    n = length - 1
    return n * (n + 9) // 2 + 1


# admissible neighbor multisets per value, in order of preference; the first
# entry of each list is the neighborhood drawn in the original figure
_ROLES = {
    "a": (("a", "b", "b"), ("a", "a", "c")),
    "b": (("a", "c", "c"), ("b", "b", "c")),
    "c": (("b", "b", "c"), ("a", "c", "c")),
}


def _children(value: str, parent: str) -> tuple[str, str]:
    for role in _ROLES[value]:
        if parent in role:
            rest = list(role)
            rest.remove(parent)
            return tuple(sorted(rest))
    raise AssertionError(f"no neighborhood for {value} below {parent}")


def _missing_neighbor(value: str, seen: list[str]) -> str:
    for role in _ROLES[value]:
        rest = Counter(role) - Counter(seen)
        if sum(rest.values()) == 1:
            return next(iter(rest))
    raise AssertionError(f"no neighborhood for {value} beside {seen}")


def tree_counterexample(a: float, b: float, depth: int, branch_depth: int = 3) -> TreeCounterexample:
    """Three-valued stationary field on a truncated binary tree that is not perfect.

    The spine ``-depth..depth`` carries a at positions +-n(n+9)/2, b next to
    them and c elsewhere, so the c-islands have lengths 2, 3, 4, ...; the
    hanging branches are filled top-down so that every interior vertex sees
    one of the admissible neighborhoods of its value.  The reaction is the
    quadratic through (a, 2a-2b), (b, 3b-a-2c), (c, 2c-2b), which makes the
    field stationary for d = 1.
    """
    a, b = float(a), float(b)
    c = 2 * b - a
    if len({a, b, c}) < 3:
        raise ValueError(f"values a={a}, b={b}, c={c} must be pairwise distinct")
    if depth < 10:
        raise ValueError("spine half-length must be at least 10")
    if branch_depth < 1:
        raise ValueError("branch depth must be at least 1")
    patch = build_patch(GridKind.BINARY_TREE, (depth, branch_depth))
    a_pos = _island_positions(depth + 2)
    sym: dict[tuple[int, int, int], str] = {}
    for s in range(-depth, depth + 1):
        sym[(s, 0, 0)] = spine_symbol(s, a_pos)
    for s in range(-depth, depth + 1):
        seen = [spine_symbol(s - 1, a_pos), spine_symbol(s + 1, a_pos)]
        sym[(s, 1, 0)] = _missing_neighbor(sym[(s, 0, 0)], seen)
    for t in range(1, branch_depth):
        for s in range(-depth, depth + 1):
            for p in range(2 ** (t - 1)):
                parent = sym[(s, t - 1, p // 2)] if t > 1 else sym[(s, 0, 0)]
                kids = _children(sym[(s, t, p)], parent)
                sym[(s, t + 1, 2 * p)], sym[(s, t + 1, 2 * p + 1)] = kids
    lookup = {"a": a, "b": b, "c": c}
    values = np.array([lookup[sym[coord]] for coord in patch.coords])
    targets = np.array([2 * a - 2 * b, 3 * b - a - 2 * c, 2 * c - 2 * b])
    # ascending coefficients of the interpolating quadratic
    vander = np.vander(np.array([a, b, c]), 3, increasing=True)
    coeffs = tuple(float(x) for x in np.linalg.solve(vander, targets))
    return TreeCounterexample(patch, ValueField(patch, values), coeffs, (a, b, c))
