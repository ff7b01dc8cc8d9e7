"""Constructions of perfect colorings."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .coloring import Coloring, ColoringMatrix, extract_matrix, validate_matrix
from .lattice import GridKind, Patch, PeriodVectors, build_patch, translate, translation_shifts


# ---------------------------------------------------------------- path graph


def canonical_word(word: Sequence[int]) -> tuple[int, ...]:
    """Smallest rotation of the word or of its reversal."""
    word = tuple(word)
    n = len(word)
    cands = []
    for w in (word, word[::-1]):
        cands.extend(w[i:] + w[:i] for i in range(n))
    return min(cands)


def path_coloring(matrix: ColoringMatrix) -> list[tuple[int, ...]]:
    """Periodic words realizing ``matrix`` on the infinite path, up to shift and reflection.

    A word is a closed walk on the arcs ``i -> j`` (``m_ij`` copies) in which
    a vertex of color ``c`` entered from ``l`` must leave to the remaining
    element of row ``c``.  That rule is a permutation of the arcs, so its
    cycles are exactly the periodic perfect colorings.  One word is returned
    per cycle class; irreducible matrices give a single word.
    """
    if matrix.k != 2:
        raise ValueError("path colorings need k = 2")
    report = validate_matrix(matrix)
    if not report.admissible:
        raise ValueError("inadmissible matrix: " + "; ".join(report.messages()))
    rows = matrix.rows
    n = matrix.n

    def row_multiset(c: int) -> list[int]:
        return [j for j in range(n) for _ in range(rows[c][j])]

    def step(state: tuple[int, int]) -> tuple[int, int]:
        prev, cur = state
        rest = row_multiset(cur)
        rest.remove(prev)
        return cur, rest[0]

    states = [(l, c) for c in range(n) for l in set(row_multiset(c))]
    seen: set = set()
    words = set()
    for start in states:
        if start in seen:
            continue
        word = []
        s = start
        while s not in seen:
            seen.add(s)
            word.append(s[1] + 1)
            s = step(s)
        if s != start:
            raise AssertionError("arc successor map is not a permutation")
        words.add(canonical_word(word))
    return sorted(words, key=lambda w: (len(w), w))


# ----------------------------------------------------------- periodic lifts


@dataclass(frozen=True)
class PeriodLattice:
    """Basis ``(p, 0), (q, r)`` of the lattice spanned by two period vectors."""

    p: int
    q: int
    r: int

    @classmethod
    def from_periods(cls, periods: PeriodVectors) -> "PeriodLattice":
        (x1, y1), (x2, y2) = periods.v1, periods.v2
        g, s, t = _ext_gcd(y1, y2)
        if g == 0:
            raise ValueError("period vectors are linearly dependent")
        wx = s * x1 + t * x2
        if g < 0:
            g, wx = -g, -wx
        p = abs(periods.determinant) // g
        return cls(p, wx % p, g)

    @property
    def index(self) -> int:
        return self.p * self.r

    def torus_extents(self) -> tuple[int, int]:
        return self.p, self.r * (self.p // math.gcd(self.p, self.q))

    def color_of(self, x: int, y: int) -> int:
        k = y // self.r
        x -= k * self.q
        y -= k * self.r
        return y * self.p + (x % self.p) + 1


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    if b == 0:
        return a, 1, 0
    g, s, t = _ext_gcd(b, a % b)
    return g, t, s - (a // b) * t


def periodic_lift(kind: GridKind | str, periods: PeriodVectors) -> tuple[Coloring, ColoringMatrix]:
    """One color per coset of the period lattice, tiled on the smallest compatible torus."""
    kind = GridKind.parse(kind)
    if not kind.is_2d:
        raise ValueError("periodic lifts need a 2D grid")
    periods.check_kind(kind)
    lat = PeriodLattice.from_periods(periods)
    width, height = lat.torus_extents()
    patch = build_patch(kind, (width, height), True)
    colors = [lat.color_of(x, y) for x, y in patch.coords]
    coloring = Coloring(patch, colors, lat.index)
    return coloring, extract_matrix(coloring)


@dataclass(frozen=True)
class Motif:
    width: int
    height: int
    cells: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(int(c) for c in self.cells))
        if self.width <= 0 or self.height <= 0:
            raise ValueError("motif dimensions must be positive")
        if len(self.cells) != self.width * self.height:
            raise ValueError("motif cell count does not match its dimensions")
        if min(self.cells) < 1:
            raise ValueError("motif colors start at 1")

    @classmethod
    def parse(cls, text: str) -> "Motif":
        """``"1,2;3,4"``: rows separated by ``;`` (row 0 is y = 0)."""
        rows = [[int(c) for c in row.replace(" ", "").split(",") if c] for row in text.split(";")]
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ValueError("ragged motif")
        return cls(width, len(rows), tuple(c for r in rows for c in r))


def motif_tiling(kind: GridKind | str, motif: Motif, extents: Sequence[int], n: int | None = None) -> Coloring:
    kind = GridKind.parse(kind)
    if not kind.is_2d:
        raise ValueError("motif tilings need a 2D grid")
    width, height = (int(e) for e in extents)
    if width % motif.width or height % motif.height:
        raise ValueError(f"torus {width}x{height} is not a multiple of motif {motif.width}x{motif.height}")
    patch = build_patch(kind, (width, height), True)
    colors = [motif.cells[(y % motif.height) * motif.width + (x % motif.width)] for x, y in patch.coords]
    return Coloring(patch, colors, max(motif.cells) if n is None else n)


# ------------------------------------------------------- bit-word families

STRIPES_22 = ColoringMatrix.of([[2, 2], [2, 2]], 4)
CHECKER_3 = ColoringMatrix.of([[0, 2, 2], [4, 0, 0], [4, 0, 0]], 4)


def _cumulative(bits: Sequence[int], lo: int, hi: int, weight) -> dict[int, int]:
    """``S(s) = sum_{t<s} w(t)`` relative to ``S(0) = 0`` for ``s`` in ``lo..hi``."""
    out = {0: 0}
    acc = 0
    for s in range(0, hi):
        acc += weight(s)
        out[s + 1] = acc
    acc = 0
    for s in range(-1, lo - 1, -1):
        acc -= weight(s)
        out[s] = acc
    return out


def bit_sequence_coloring(
    matrix: ColoringMatrix, bits: Sequence[int], extents: Sequence[int], origin: Sequence[int] = (0, 0)
) -> Coloring:
    """Aperiodic-family coloring of an open square window driven by a bit word.

    ``[[2,2],[2,2]]``: a staircase path through the origin takes step ``t`` to
    the right when ``bits[t % L] + t`` is even and up otherwise; its translates
    by multiples of ``(1, -1)`` partition the plane and are colored
    alternately.  All-zero bits give straight diagonal stripes; a 1 bit makes
    every stripe shift.  Each vertex keeps its two path neighbors in its own
    color and sees the other color across both adjacent stripes.

    ``[[0,2,2],[4,0,0],[4,0,0]]``: even vertices get color 1; the odd vertex
    ``(x, y)`` sits in row ``a = (x+y-1)/2`` and column ``b = (x-y-1)/2`` of the
    odd sublattice and gets ``2 + (b + phase(a)) % 2`` where the phase flips
    whenever a bit is 1.
    """
    bits = [int(b) for b in bits]
    if not bits or any(b not in (0, 1) for b in bits):
        raise ValueError("bit word must be a non-empty 0/1 sequence")
    width, height = (int(e) for e in extents)
    if min(width, height) < 4:
        raise ValueError("window must be at least 4x4")
    patch = build_patch(GridKind.SQUARE, (width, height), False)
    ox, oy = (int(o) for o in origin)
    big = len(bits)
    xs = np.array([c[0] for c in patch.coords]) + ox
    ys = np.array([c[1] for c in patch.coords]) + oy
    if matrix == STRIPES_22:
        sums = xs + ys
        rights = _cumulative(bits, int(sums.min()), int(sums.max()), lambda t: int((bits[t % big] + t) % 2 == 0))
        j = xs - np.array([rights[int(s)] for s in sums])
        colors = (j % 2) + 1
    elif matrix == CHECKER_3:
        odd = (xs + ys) % 2 == 1
        a = (xs + ys - 1) // 2
        b = (xs - ys - 1) // 2
        flips = _cumulative(bits, int(a.min()), int(a.max()), lambda t: bits[t % big])
        phase = np.array([flips[int(v)] for v in a])
        colors = np.where(odd, 2 + (b + phase) % 2, 1)
    else:
        raise ValueError(f"no bit-word family for matrix {matrix}")
    return Coloring(patch, colors, matrix.n)


def window_translation_equivalent(a: Coloring, b: Coloring, min_overlap: float = 0.5) -> bool:
    """Do two window colorings agree under some translation on a large overlap?

    Every shift whose overlap covers at least ``min_overlap`` of the window
    in each direction is tried.
    """
    ga, gb = a.grid(), b.grid()
    if ga.shape != gb.shape:
        raise ValueError("windows differ in size")
    h, w = ga.shape
    min_w, min_h = math.ceil(min_overlap * w), math.ceil(min_overlap * h)
    for sy in range(-(h - min_h), h - min_h + 1):
        for sx in range(-(w - min_w), w - min_w + 1):
            pa = ga[max(0, sy) : h + min(0, sy), max(0, sx) : w + min(0, sx)]
            pb = gb[max(0, -sy) : h + min(0, -sy), max(0, -sx) : w + min(0, -sx)]
            if np.array_equal(pa, pb):
                return True
    return False


# ------------------------------------------------------------ torus search


@dataclass(frozen=True, eq=False)
class TorusSearchResult:
    colorings: list[Coloring] = field(repr=False)
    truncated: bool
    nodes: int

    def __len__(self) -> int:
        return len(self.colorings)


def _symmetry_perms(patch: Patch, point_symmetries: bool) -> list[np.ndarray]:
    perms = [translate(patch, s) for s in translation_shifts(patch)]
    if not point_symmetries:
        return perms
    if patch.kind != GridKind.SQUARE:
        raise ValueError("point symmetries are implemented for the square grid only")
    width, height = patch.dims
    maps = [lambda x, y: (x, y), lambda x, y: (-x, y), lambda x, y: (x, -y), lambda x, y: (-x, -y)]
    if width == height:
        maps += [lambda x, y: (y, x), lambda x, y: (-y, x), lambda x, y: (y, -x), lambda x, y: (-y, -x)]
    out = []
    for g in maps:
        gp = np.array([patch.index(g(x, y)) for x, y in patch.coords])
        out.extend(gp[t] for t in perms)
    return out


def canonical_form(colors: np.ndarray, perms: list[np.ndarray]) -> tuple[int, ...]:
    return min(tuple(colors[p].tolist()) for p in perms)


def torus_search(
    kind: GridKind | str,
    extents: Sequence[int],
    matrix: ColoringMatrix,
    limit: int = 1000,
    point_symmetries: bool = False,
    surjective: bool = False,
) -> TorusSearchResult:
    """All ``matrix``-perfect colorings of a torus up to translation.

    Depth-first over vertices in index order and colors ascending.  Each
    vertex tracks how many assigned neighbors of each color it has; an
    assignment is rejected as soon as some vertex exceeds its row, and the
    branch is cut when an unassigned neighbor has no color left whose row
    dominates its current counts.
    """
    kind = GridKind.parse(kind)
    patch = build_patch(kind, extents, True)
    if matrix.k != patch.degree:
        raise ValueError(f"matrix k={matrix.k} does not match grid degree {patch.degree}")
    n = matrix.n
    rows = [list(r) for r in matrix.rows]
    size = patch.size
    # neighbor multiplicities
    nbr_mult: list[list[tuple[int, int]]] = []
    for v in range(size):
        mult: dict[int, int] = {}
        for u in patch.neighbor_lists[v]:
            mult[u] = mult.get(u, 0) + 1
        nbr_mult.append(sorted(mult.items()))
    assign = [0] * size
    counts = [[0] * n for _ in range(size)]
    perms = _symmetry_perms(patch, point_symmetries)
    found: dict[tuple, np.ndarray] = {}
    nodes = 0
    truncated = False

    def fits(v: int, c: int) -> bool:
        row = rows[c]
        cv = counts[v]
        if any(cv[j] > row[j] for j in range(n)):
            return False
        for u, m in nbr_mult[v]:
            if u == v:
                if counts[v][c] + m > row[c]:
                    return False
            elif assign[u] and counts[u][c] + m > rows[assign[u] - 1][c]:
                return False
        return True

    def has_option(w: int) -> bool:
        cw = counts[w]
        return any(all(cw[j] <= rows[c][j] for j in range(n)) for c in range(n))

    def place(v: int, c: int, sign: int) -> None:
        for u, m in nbr_mult[v]:
            counts[u][c] += sign * m

    def dfs(v: int) -> bool:
        nonlocal nodes, truncated
        if v == size:
            colors = np.array(assign, dtype=np.int64)
            if surjective and len(set(assign)) < n:
                return True
            key = canonical_form(colors, perms)
            if key not in found:
                if len(found) >= limit:
                    truncated = True
                    return False
                found[key] = np.array(key, dtype=np.int64)
            return True
        for c in range(n):
            if not fits(v, c):
                continue
            nodes += 1
            assign[v] = c + 1
            place(v, c, 1)
            ok = all(assign[u] or has_option(u) for u, _ in nbr_mult[v])
            if ok and not dfs(v + 1):
                place(v, c, -1)
                assign[v] = 0
                return False
            place(v, c, -1)
            assign[v] = 0
        return True

    dfs(0)
    colorings = [Coloring(patch, found[key], n) for key in sorted(found)]
    return TorusSearchResult(colorings, truncated, nodes)


def exhaustive_search(
    kind: GridKind | str, extents: Sequence[int], matrix: ColoringMatrix, point_symmetries: bool = False
) -> list[tuple[int, ...]]:
    """Brute force over all ``n^|V|`` assignments; canonical forms of the perfect ones."""
    patch = build_patch(GridKind.parse(kind), extents, True)
    n, size = matrix.n, patch.size
    if n**size > 1 << 20:
        raise ValueError("too many assignments for exhaustive search")
    nbr = patch.neighbor_array()
    m = matrix.array()
    perms = _symmetry_perms(patch, point_symmetries)
    # every assignment as a row of base-n digits
    codes = np.arange(n**size, dtype=np.int64)
    digits = (codes[:, None] // (n ** np.arange(size))[None, :]) % n
    ok = np.ones(len(codes), dtype=bool)
    for v in range(size):
        cnt = np.zeros((len(codes), n), dtype=np.int64)
        for u in nbr[v]:
            cnt[np.arange(len(codes)), digits[:, u]] += 1
        ok &= np.all(cnt == m[digits[:, v]], axis=1)
    found = {canonical_form(row + 1, perms) for row in digits[ok]}
    return sorted(found)
