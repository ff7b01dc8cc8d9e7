"""Finite realizations of the regular grids.

Vertices are numbered ``0..N-1``.  For the path the index is the coordinate
``x``; for two-dimensional grids it is ``y * W + x``.  Binary-tree patches
number the spine first (``s + S`` for ``s`` in ``-S..S``) and then the
off-spine vertices breadth-first.

Wrapped patches keep neighbor multiplicities, so a 2x2 square torus is a
4-regular multigraph in which ``(0, 0)`` sees ``(1, 0)`` twice.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class GridKind(str, enum.Enum):
    PATH = "path"
    SQUARE = "square"
    TRIANGULAR = "triangular"
    HEXAGONAL = "hexagonal"
    BINARY_TREE = "binary_tree"

    @property
    def degree(self) -> int:
        return _DEGREE[self]

    @property
    def is_2d(self) -> bool:
        return self in (GridKind.SQUARE, GridKind.TRIANGULAR, GridKind.HEXAGONAL)

    @classmethod
    def parse(cls, value: "GridKind | str") -> "GridKind":
        if isinstance(value, GridKind):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown grid kind {value!r}") from None


_DEGREE = {
    GridKind.PATH: 2,
    GridKind.SQUARE: 4,
    GridKind.TRIANGULAR: 6,
    GridKind.HEXAGONAL: 3,
    GridKind.BINARY_TREE: 3,
}

_SQUARE_OFFSETS = ((1, 0), (-1, 0), (0, 1), (0, -1))
_TRIANGULAR_OFFSETS = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1))


class PatchError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Patch:
    """A finite piece of a grid with fixed neighbor lists.

    ``neighbor_lists[i]`` is ordered by the offset order of the grid; for
    vertices on an open boundary the missing neighbors are simply absent and
    ``interior[i]`` is False.
    """

    kind: GridKind
    dims: tuple[int, ...]
    wrap: tuple[bool, ...]
    coords: tuple[tuple[int, ...], ...]
    neighbor_lists: tuple[tuple[int, ...], ...]
    interior: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.coords)

    @property
    def degree(self) -> int:
        return self.kind.degree

    @property
    def fully_wrapped(self) -> bool:
        return self.kind != GridKind.BINARY_TREE and all(self.wrap)

    def neighbors(self, vertex: int) -> list[int]:
        if not 0 <= vertex < self.size:
            raise IndexError(f"vertex {vertex} out of range 0..{self.size - 1}")
        return list(self.neighbor_lists[vertex])

    def index(self, coord: Sequence[int]) -> int:
        """Vertex index of a coordinate (wrapped axes reduce modulo extent)."""
        if self.kind == GridKind.BINARY_TREE:
            return self._tree_index[tuple(coord)]
        coord = tuple(int(c) for c in coord)
        reduced = []
        for c, extent, wrapped in zip(coord, self.dims, self.wrap):
            if wrapped:
                c %= extent
            elif not 0 <= c < extent:
                raise IndexError(f"coordinate {coord} outside the window")
            reduced.append(c)
        if self.kind == GridKind.PATH:
            return reduced[0]
        return reduced[1] * self.dims[0] + reduced[0]

    @property
    def _tree_index(self) -> dict:
        cache = self.__dict__.get("_tree_index_cache")
        if cache is None:
            cache = {c: i for i, c in enumerate(self.coords)}
            object.__setattr__(self, "_tree_index_cache", cache)
        return cache

    def neighbor_array(self) -> np.ndarray:
        """(N, k) array of neighbor indices; rows of non-interior vertices are -1 padded."""
        cache = self.__dict__.get("_nbr_array")
        if cache is None:
            k = self.degree
            cache = np.full((self.size, k), -1, dtype=np.int64)
            for i, nb in enumerate(self.neighbor_lists):
                cache[i, : len(nb)] = nb
            cache.setflags(write=False)
            object.__setattr__(self, "_nbr_array", cache)
        return cache

    def descriptor(self) -> dict:
        return {"kind": self.kind.value, "dims": list(self.dims), "wrap": list(self.wrap)}


def _check_dims(dims: Sequence[int], count: int, kind: GridKind) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if len(dims) != count:
        raise PatchError(f"{kind.value} patch needs {count} extents, got {len(dims)}")
    if any(d <= 0 for d in dims):
        raise PatchError(f"extents must be positive, got {dims}")
    return dims


def _wrap_tuple(wrap, count: int) -> tuple[bool, ...]:
    if isinstance(wrap, bool):
        return (wrap,) * count
    wrap = tuple(bool(w) for w in wrap)
    if len(wrap) == 1:
        wrap = wrap * count
    if len(wrap) != count:
        raise PatchError(f"expected {count} wrap flags, got {len(wrap)}")
    return wrap


def hex_offsets(x: int, y: int) -> tuple[tuple[int, int], ...]:
    """Brick-wall hexagonal neighbors: left, right, then up or down by parity."""
    vertical = (0, 1) if (x + y) % 2 == 0 else (0, -1)
    return ((1, 0), (-1, 0), vertical)


def _offsets(kind: GridKind, x: int, y: int):
    if kind == GridKind.SQUARE:
        return _SQUARE_OFFSETS
    if kind == GridKind.TRIANGULAR:
        return _TRIANGULAR_OFFSETS
    return hex_offsets(x, y)


def build_patch(kind: GridKind | str, dims: Sequence[int], wrap=True) -> Patch:
    """Build a ring/torus/window of a grid, or a truncated binary tree.

    ``dims`` is ``(L,)`` for the path, ``(W, H)`` for 2D grids and
    ``(S, D)`` for the binary tree (spine ``-S..S``, off-spine branches of
    depth ``D``).  Tree patches ignore ``wrap``.
    """
    kind = GridKind.parse(kind)
    if kind == GridKind.BINARY_TREE:
        return _build_tree(_check_dims(dims, 2, kind))
    if kind == GridKind.PATH:
        (length,) = _check_dims(dims, 1, kind)
        (wrapped,) = _wrap_tuple(wrap, 1)
        coords = tuple((x,) for x in range(length))
        nbrs = []
        for x in range(length):
            row = []
            for dx in (1, -1):
                nx_ = x + dx
                if wrapped:
                    row.append(nx_ % length)
                elif 0 <= nx_ < length:
                    row.append(nx_)
            nbrs.append(tuple(row))
        return _finish(kind, (length,), (wrapped,), coords, nbrs)

    width, height = _check_dims(dims, 2, kind)
    wrap_x, wrap_y = _wrap_tuple(wrap, 2)
    if kind == GridKind.HEXAGONAL:
        if wrap_x and width % 2:
            raise PatchError("wrapped hexagonal patch needs an even width")
        if wrap_y and height % 2:
            raise PatchError("wrapped hexagonal patch needs an even height")
    coords = tuple((x, y) for y in range(height) for x in range(width))
    nbrs = []
    for x, y in coords:
        row = []
        for dx, dy in _offsets(kind, x, y):
            nx_, ny_ = x + dx, y + dy
            if wrap_x:
                nx_ %= width
            elif not 0 <= nx_ < width:
                continue
            if wrap_y:
                ny_ %= height
            elif not 0 <= ny_ < height:
                continue
            row.append(ny_ * width + nx_)
        nbrs.append(tuple(row))
    return _finish(kind, (width, height), (wrap_x, wrap_y), coords, nbrs)


def _build_tree(dims: tuple[int, int]) -> Patch:
    half, depth = dims
    coords: list[tuple[int, int, int]] = [(s, 0, 0) for s in range(-half, half + 1)]
    for t in range(1, depth + 1):
        for s in range(-half, half + 1):
            coords.extend((s, t, p) for p in range(2 ** (t - 1)))
    index = {c: i for i, c in enumerate(coords)}
    nbrs = []
    for s, t, p in coords:
        row = []
        if t == 0:
            for c in ((s - 1, 0, 0), (s + 1, 0, 0), (s, 1, 0)):
                if c in index:
                    row.append(index[c])
        else:
            row.append(index[(s, t - 1, p // 2) if t > 1 else (s, 0, 0)])
            for c in ((s, t + 1, 2 * p), (s, t + 1, 2 * p + 1)):
                if c in index:
                    row.append(index[c])
        nbrs.append(tuple(row))
    return _finish(GridKind.BINARY_TREE, dims, (False,), tuple(coords), nbrs)


def _finish(kind, dims, wrap, coords, nbrs) -> Patch:
    k = kind.degree
    interior = np.array([len(nb) == k for nb in nbrs], dtype=bool)
    interior.setflags(write=False)
    return Patch(kind, tuple(dims), tuple(wrap), tuple(coords), tuple(nbrs), interior)


def neighbors(patch: Patch, vertex: int) -> list[int]:
    return patch.neighbors(vertex)


@dataclass(frozen=True)
class PeriodVectors:
    v1: tuple[int, int]
    v2: tuple[int, int]

    def __post_init__(self):
        object.__setattr__(self, "v1", tuple(int(c) for c in self.v1))
        object.__setattr__(self, "v2", tuple(int(c) for c in self.v2))
        if len(self.v1) != 2 or len(self.v2) != 2:
            raise ValueError("period vectors must be 2-vectors")
        if self.determinant == 0:
            raise ValueError(f"period vectors {self.v1}, {self.v2} are linearly dependent")

    @property
    def determinant(self) -> int:
        return self.v1[0] * self.v2[1] - self.v1[1] * self.v2[0]

    def check_kind(self, kind: GridKind) -> None:
        if kind == GridKind.HEXAGONAL and any(c % 2 for c in self.v1 + self.v2):
            raise ValueError("hexagonal periods need all coordinates even")


def translate(patch: Patch, shift: Sequence[int]) -> np.ndarray:
    """Permutation ``p`` with ``p[i]`` the index of ``coords[i] + shift``."""
    if not patch.fully_wrapped:
        raise PatchError("translations are defined on fully wrapped patches only")
    shift = tuple(int(s) for s in shift)
    if len(shift) != len(patch.dims):
        raise PatchError(f"shift {shift} does not match patch dimension {len(patch.dims)}")
    if patch.kind == GridKind.HEXAGONAL and any(s % 2 for s in shift):
        raise PatchError("hexagonal translations need even components")
    coords = np.asarray(patch.coords, dtype=np.int64)
    dims = np.asarray(patch.dims, dtype=np.int64)
    moved = (coords + np.asarray(shift)) % dims
    if patch.kind == GridKind.PATH:
        return moved[:, 0]
    return moved[:, 1] * dims[0] + moved[:, 0]


def translation_shifts(patch: Patch) -> list[tuple[int, ...]]:
    """All distinct admissible translations of a fully wrapped patch."""
    if patch.kind == GridKind.PATH:
        return [(s,) for s in range(patch.dims[0])]
    step = 2 if patch.kind == GridKind.HEXAGONAL else 1
    width, height = patch.dims
    return [(sx, sy) for sy in range(0, height, step) for sx in range(0, width, step)]
