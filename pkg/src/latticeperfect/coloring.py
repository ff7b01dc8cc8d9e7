"""Coloring matrices, colorings and perfect-coloring checks."""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .lattice import GridKind, Patch

VALUE_TOL = 1e-8


class NotPerfectError(ValueError):
    """Raised when a coloring has two same-colored vertices with different neighborhoods."""

    def __init__(self, color: int, witnesses: tuple[int, int], rows: tuple[tuple[int, ...], ...]):
        self.color = color
        self.witnesses = witnesses
        self.rows = rows
        super().__init__(
            f"color {color} is inconsistent: vertex {witnesses[0]} sees {list(rows[0])}, "
            f"vertex {witnesses[1]} sees {list(rows[1])}"
        )


class IncompatibleMergerError(ValueError):
    """Raised when two colors merged together aggregate to different rows."""

    def __init__(self, sources: tuple[int, int], rows: tuple[tuple[int, ...], ...]):
        self.sources = sources
        self.rows = rows
        super().__init__(
            f"colors {sources[0]} and {sources[1]} merge together but aggregate to "
            f"{list(rows[0])} and {list(rows[1])}"
        )


@dataclass(frozen=True)
class ColoringMatrix:
    rows: tuple[tuple[int, ...], ...]
    k: int

    def __post_init__(self):
        rows = tuple(tuple(int(x) for x in r) for r in self.rows)
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise ValueError("coloring matrix must be square and non-empty")
        if any(x < 0 for r in rows for x in r):
            raise ValueError("coloring matrix entries must be nonnegative")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "k", int(self.k))

    @classmethod
    def of(cls, rows: Iterable[Iterable[int]], k: int | None = None) -> "ColoringMatrix":
        rows = tuple(tuple(int(x) for x in r) for r in rows)
        if k is None:
            k = sum(rows[0]) if rows else 0
        return cls(rows, k)

    @property
    def n(self) -> int:
        return len(self.rows)

    def array(self) -> np.ndarray:
        return np.array(self.rows, dtype=np.int64)

    def permuted(self, perm: Sequence[int]) -> "ColoringMatrix":
        """Simultaneous row/column permutation; ``perm`` is 0-based, new i = old perm[i]."""
        a = self.array()[np.ix_(perm, perm)]
        return ColoringMatrix.of(a.tolist(), self.k)

    def __str__(self) -> str:
        return str([list(r) for r in self.rows])


@dataclass(frozen=True)
class MatrixReport:
    row_sum_violations: tuple[int, ...]
    sign_asymmetries: tuple[tuple[int, int], ...]

    @property
    def admissible(self) -> bool:
        return not self.row_sum_violations and not self.sign_asymmetries

    def messages(self) -> list[str]:
        out = [f"row {i} does not sum to k" for i in self.row_sum_violations]
        out += [f"sign asymmetry at ({i},{j})/({j},{i})" for i, j in self.sign_asymmetries]
        return out


def validate_matrix(matrix: ColoringMatrix) -> MatrixReport:
    """Check row sums and the symmetric sign pattern; indices in the report are 1-based."""
    rows = matrix.rows
    bad_rows = tuple(i + 1 for i, r in enumerate(rows) if sum(r) != matrix.k)
    asym = tuple(
        (i + 1, j + 1)
        for i in range(matrix.n)
        for j in range(i + 1, matrix.n)
        if (rows[i][j] > 0) != (rows[j][i] > 0)
    )
    return MatrixReport(bad_rows, asym)


@dataclass(frozen=True, eq=False)
class Coloring:
    patch: Patch
    colors: np.ndarray = field(repr=False)
    n: int

    def __post_init__(self):
        colors = np.asarray(self.colors, dtype=np.int64).reshape(-1)
        if colors.shape[0] != self.patch.size:
            raise ValueError(f"expected {self.patch.size} colors, got {colors.shape[0]}")
        if colors.size and (colors.min() < 1 or colors.max() > self.n):
            raise ValueError(f"colors must lie in 1..{self.n}")
        colors = colors.copy()
        colors.setflags(write=False)
        object.__setattr__(self, "colors", colors)

    @classmethod
    def of(cls, patch: Patch, colors: Sequence[int], n: int | None = None) -> "Coloring":
        colors = np.asarray(colors, dtype=np.int64).reshape(-1)
        return cls(patch, colors, int(colors.max()) if n is None else n)

    def grid(self) -> np.ndarray:
        """Colors as an (H, W) array for 2D patches (row = y)."""
        if not self.patch.kind.is_2d:
            raise ValueError("grid view needs a 2D patch")
        w, h = self.patch.dims
        return self.colors.reshape(h, w)


@dataclass(frozen=True, eq=False)
class ValueField:
    patch: Patch
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).reshape(-1)
        if values.shape[0] != self.patch.size:
            raise ValueError(f"expected {self.patch.size} values, got {values.shape[0]}")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def image(self, tol: float = VALUE_TOL) -> list[float]:
        """Distinct attained values; values closer than ``tol`` (chained) count as one."""
        return [float(g[0]) for g in _value_groups(self.values, tol)[1]]

    def to_coloring(self, tol: float = VALUE_TOL) -> Coloring:
        """Color vertices by the rank of their value in the image (ascending)."""
        labels, groups = _value_groups(self.values, tol)
        return Coloring(self.patch, labels, len(groups))


def _value_groups(values: np.ndarray, tol: float):
    order = np.argsort(values, kind="stable")
    labels = np.zeros(len(values), dtype=np.int64)
    groups: list[list[float]] = []
    prev = None
    for idx in order:
        x = values[idx]
        if prev is None or x - prev > tol:
            groups.append([x])
        else:
            groups[-1].append(x)
        labels[idx] = len(groups)
        prev = x
    return labels, groups


def neighbor_color_counts(coloring: Coloring, n: int | None = None) -> np.ndarray:
    """(N, n) counts of neighbor colors; rows of boundary vertices count only present neighbors."""
    n = coloring.n if n is None else n
    nbr = coloring.patch.neighbor_array()
    counts = np.zeros((coloring.patch.size, n), dtype=np.int64)
    rows, cols = np.nonzero(nbr >= 0)
    np.add.at(counts, (rows, coloring.colors[nbr[rows, cols]] - 1), 1)
    return counts


@dataclass(frozen=True)
class Verdict:
    perfect: bool
    vertex: int | None = None
    expected: tuple[int, ...] | None = None
    found: tuple[int, ...] | None = None

    def __bool__(self) -> bool:
        return self.perfect


def verify_perfect(coloring: Coloring, matrix: ColoringMatrix) -> Verdict:
    """Compare every interior neighborhood with the row of the vertex color."""
    if coloring.n != matrix.n:
        raise ValueError(f"coloring has {coloring.n} colors, matrix has {matrix.n}")
    if coloring.patch.degree != matrix.k:
        raise ValueError(f"patch degree {coloring.patch.degree} != matrix k {matrix.k}")
    counts = neighbor_color_counts(coloring)
    expected = matrix.array()[coloring.colors - 1]
    bad = np.nonzero(coloring.patch.interior & np.any(counts != expected, axis=1))[0]
    if bad.size == 0:
        return Verdict(True)
    v = int(bad[0])
    return Verdict(False, v, tuple(int(x) for x in expected[v]), tuple(int(x) for x in counts[v]))


def extract_matrix(coloring: Coloring) -> ColoringMatrix:
    """Read off the coloring matrix from interior neighborhoods.

    Raises NotPerfectError with the two lowest-index conflicting vertices, or
    ValueError if some color never occurs on an interior vertex.
    """
    counts = neighbor_color_counts(coloring)
    interior = coloring.patch.interior
    rows = []
    for c in range(1, coloring.n + 1):
        members = np.nonzero(interior & (coloring.colors == c))[0]
        if members.size == 0:
            raise ValueError(f"color {c} does not occur on any interior vertex")
        first = counts[members[0]]
        diff = np.nonzero(np.any(counts[members] != first, axis=1))[0]
        if diff.size:
            other = members[diff[0]]
            raise NotPerfectError(
                c, (int(members[0]), int(other)), (tuple(first.tolist()), tuple(counts[other].tolist()))
            )
        rows.append(first.tolist())
    return ColoringMatrix.of(rows, coloring.patch.degree)


@dataclass(frozen=True, eq=False)
class RefinementResult:
    partition: np.ndarray = field(repr=False)
    class_count: int
    induced_matrix: ColoringMatrix | None
    stabilized: bool
    iterations: int

    def coloring(self, patch: Patch) -> Coloring:
        """Interior classes as a coloring (requires no boundary classes)."""
        if self.partition.max() > self.class_count:
            raise ValueError("partition contains frozen boundary classes")
        return Coloring(patch, self.partition, self.class_count)


def refine_partition(
    source: Coloring | ValueField, tol: float = VALUE_TOL, max_iter: int | None = None
) -> RefinementResult:
    """Coarsest equitable refinement of a coloring or of the level sets of a field.

    Boundary vertices are frozen into one class per initial color; they can
    split interior classes but are never split themselves.  Interior classes
    are numbered 1.. in order of their lowest vertex index, boundary classes
    come after them.
    """
    coloring = source.to_coloring(tol) if isinstance(source, ValueField) else source
    patch = coloring.patch
    interior = patch.interior
    nbr = patch.neighbor_array()
    labels = coloring.colors.copy()
    # boundary classes get negative labels so they never coincide with interior ones
    labels = np.where(interior, labels, -labels)
    max_iter = patch.size + 1 if max_iter is None else max_iter
    interior_idx = np.nonzero(interior)[0]
    labels, count = _relabel(labels, interior)
    stabilized = False
    it = 0
    for it in range(1, max_iter + 1):
        table: dict = {}
        new = labels.copy()
        for v in interior_idx:
            sig = (labels[v], tuple(sorted(labels[nbr[v]].tolist())))
            new[v] = table.setdefault(sig, len(table) + 1)
        new, new_count = _relabel(new, interior)
        if new_count == count:
            stabilized = True
            labels = new
            break
        labels, count = new, new_count
    n_boundary = len(set(labels[~interior].tolist()))
    matrix = None
    touches_boundary = bool(np.any(labels[nbr[interior_idx]] > count)) if interior_idx.size else False
    if stabilized and n_boundary == 0 and not touches_boundary and count:
        rows = []
        for c in range(1, count + 1):
            v = int(np.argmax(labels == c))
            rows.append(np.bincount(labels[nbr[v]] - 1, minlength=count).tolist())
        matrix = ColoringMatrix.of(rows, patch.degree)
    return RefinementResult(labels, count, matrix, stabilized, it)


def _relabel(labels: np.ndarray, interior: np.ndarray) -> tuple[np.ndarray, int]:
    """Renumber interior labels by first occurrence, boundary labels after them."""
    out = np.empty_like(labels)
    mapping: dict = {}
    for v in np.nonzero(interior)[0]:
        out[v] = mapping.setdefault(("i", labels[v]), len(mapping) + 1)
    count = len(mapping)
    for v in np.nonzero(~interior)[0]:
        out[v] = mapping.setdefault(("b", labels[v]), len(mapping) + 1)
    return out, count


@dataclass(frozen=True)
class MergerMap:
    """Surjection from colors ``1..n`` onto ``1..ell`` with ``ell < n``."""

    targets: tuple[int, ...]

    def __post_init__(self):
        targets = tuple(int(t) for t in self.targets)
        object.__setattr__(self, "targets", targets)
        if not targets:
            raise ValueError("empty merger map")
        ell = max(targets)
        if min(targets) < 1 or set(targets) != set(range(1, ell + 1)):
            raise ValueError(f"merger map {targets} is not surjective onto 1..{ell}")
        if ell >= len(targets):
            raise ValueError(f"a merger must reduce the number of colors (ell={ell}, n={len(targets)})")

    @classmethod
    def from_labels(cls, labels: Sequence) -> "MergerMap":
        """Number arbitrary labels (e.g. color names) by first appearance."""
        order: dict = {}
        return cls(tuple(order.setdefault(lab, len(order) + 1) for lab in labels))

    @property
    def n(self) -> int:
        return len(self.targets)

    @property
    def ell(self) -> int:
        return max(self.targets)

    def blocks(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.ell)]
        for i, t in enumerate(self.targets, start=1):
            out[t - 1].append(i)
        return out


def merge_matrix(matrix: ColoringMatrix, phi: MergerMap) -> ColoringMatrix:
    """Aggregate the columns of each merged block; rows within a block must agree."""
    if phi.n != matrix.n:
        raise ValueError(f"merger acts on {phi.n} colors, matrix has {matrix.n}")
    a = matrix.array()
    agg = np.zeros((matrix.n, phi.ell), dtype=np.int64)
    for s, t in enumerate(phi.targets):
        agg[:, t - 1] += a[:, s]
    rows = []
    for block in phi.blocks():
        first = block[0]
        for other in block[1:]:
            if not np.array_equal(agg[first - 1], agg[other - 1]):
                raise IncompatibleMergerError(
                    (first, other), (tuple(agg[first - 1].tolist()), tuple(agg[other - 1].tolist()))
                )
        rows.append(agg[first - 1].tolist())
    return ColoringMatrix.of(rows, matrix.k)


def merge_coloring(coloring: Coloring, phi: MergerMap) -> Coloring:
    if phi.n != coloring.n:
        raise ValueError(f"merger acts on {phi.n} colors, coloring has {coloring.n}")
    lookup = np.array((0,) + phi.targets, dtype=np.int64)
    return Coloring(coloring.patch, lookup[coloring.colors], phi.ell)


def compatible_mergers(matrix: ColoringMatrix) -> list[tuple[MergerMap, ColoringMatrix]]:
    """Every proper merger of ``matrix`` whose aggregated matrix is well defined."""
    out = []
    for blocks in set_partitions(list(range(1, matrix.n + 1))):
        if len(blocks) == matrix.n:
            continue
        targets = [0] * matrix.n
        for b, block in enumerate(blocks, start=1):
            for c in block:
                targets[c - 1] = b
        phi = MergerMap(tuple(targets))
        try:
            out.append((phi, merge_matrix(matrix, phi)))
        except IncompatibleMergerError:
            pass
    return out


def set_partitions(items: list):
    """All set partitions of ``items``; blocks keep item order and are ordered by first element."""
    for part in _partitions(list(items)):
        yield sorted(part, key=lambda b: items.index(b[0]))


def _partitions(items: list):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]


def bareiss_determinant(a: Sequence[Sequence[int]]) -> int:
    """Exact determinant of an integer matrix by fraction-free elimination."""
    m = [[int(x) for x in row] for row in a]
    n = len(m)
    if any(len(row) != n for row in m):
        raise ValueError("determinant needs a square matrix")
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        pivot = m[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * pivot - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = pivot
    return sign * m[n - 1][n - 1]


def aperiodicity_matrix(matrix: ColoringMatrix, kind: GridKind | str) -> list[list[int]]:
    """The integer matrix whose singularity decides aperiodicity on ``kind``."""
    kind = GridKind.parse(kind)
    if kind not in (GridKind.SQUARE, GridKind.TRIANGULAR, GridKind.HEXAGONAL):
        raise ValueError(f"aperiodicity test is defined for 2D grids, not {kind.value}")
    if matrix.k != kind.degree or not all(sum(r) == kind.degree for r in matrix.rows):
        raise ValueError(f"row sums must equal the {kind.value} degree {kind.degree}")
    a = [list(r) for r in matrix.rows]
    n = matrix.n
    if kind == GridKind.SQUARE:
        return a
    if kind == GridKind.TRIANGULAR:
        return [[a[i][j] + (2 if i == j else 0) for j in range(n)] for i in range(n)]
    sq = [[sum(a[i][t] * a[t][j] for t in range(n)) for j in range(n)] for i in range(n)]
    return [[sq[i][j] - (1 if i == j else 0) for j in range(n)] for i in range(n)]


def aperiodicity_test(matrix: ColoringMatrix, kind: GridKind | str) -> bool:
    """True iff an aperiodic perfect coloring with this matrix exists on the grid."""
    return bareiss_determinant(aperiodicity_matrix(matrix, kind)) == 0


class Census(str, enum.Enum):
    NONEXISTENT = "nonexistent"
    UNIQUE = "unique"
    TWO_NONEQUIVALENT = "two_nonequivalent"
    UNCOUNTABLE = "uncountable"
    MONOCHROMATIC_ONLY = "monochromatic_only"


_N, _U, _T, _INF = Census.NONEXISTENT, Census.UNIQUE, Census.TWO_NONEQUIVALENT, Census.UNCOUNTABLE

# upper triangles (m11 <= m22) of the published two-color tables
_CENSUS = {
    GridKind.SQUARE: {
        0: (_U, _N, _U, _U),
        1: (_U, _U, _INF),
        2: (_INF, _T),
        3: (_U,),
    },
    GridKind.TRIANGULAR: {
        0: (_N, _N, _N, _U, _INF, _U),
        1: (_N, _N, _INF, _U, _N),
        2: (_INF, _T, _T, _N),
        3: (_U, _N, _N),
        4: (_U, _N),
        5: (_N,),
    },
    GridKind.HEXAGONAL: {
        0: (_U, _N, _INF),
        1: (_INF, _U),
        2: (_INF,),
    },
}


def two_color_census(kind: GridKind | str, m11: int, m22: int) -> Census:
    """Number of non-equivalent two-color perfect colorings with diagonal (m11, m22)."""
    kind = GridKind.parse(kind)
    if kind not in _CENSUS:
        raise ValueError(f"no census table for {kind.value}")
    k = kind.degree
    if not (0 <= m11 <= k and 0 <= m22 <= k):
        raise ValueError(f"diagonal entries must lie in 0..{k}")
    if m11 == k or m22 == k:
        return Census.MONOCHROMATIC_ONLY
    lo, hi = sorted((int(m11), int(m22)))
    return _CENSUS[kind][lo][hi - lo]


def two_color_matrix(kind: GridKind | str, m11: int, m22: int) -> ColoringMatrix:
    k = GridKind.parse(kind).degree
    return ColoringMatrix.of([[m11, k - m11], [k - m22, m22]], k)


def permutation_equivalent(a: ColoringMatrix, b: ColoringMatrix) -> bool:
    """True if ``b`` is a simultaneous row/column permutation of ``a``."""
    if a.n != b.n or a.k != b.k:
        return False
    target = b.array()
    return any(np.array_equal(a.array()[np.ix_(p, p)], target) for p in itertools.permutations(range(a.n)))
