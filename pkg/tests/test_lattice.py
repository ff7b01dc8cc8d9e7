import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from latticeperfect.lattice import (
    GridKind,
    PatchError,
    PeriodVectors,
    build_patch,
    neighbors,
    translate,
    translation_shifts,
)


def test_degrees():
    assert [g.degree for g in GridKind] == [2, 4, 6, 3, 3]


def test_square_torus_regular():
    p = build_patch("square", (4, 4))
    assert p.size == 16
    assert all(len(p.neighbors(v)) == 4 for v in range(16))
    assert p.interior.all()


def test_ring():
    p = build_patch("path", (6,))
    assert [len(p.neighbors(v)) for v in range(6)] == [2] * 6
    assert p.neighbors(0) == [1, 5]


def test_triangular_neighbors_distinct():
    p = build_patch("triangular", (5, 5))
    for v in range(p.size):
        assert len(set(p.neighbors(v))) == 6


def test_square_origin_neighbors():
    p = build_patch("square", (4, 4))
    got = {p.coords[j] for j in neighbors(p, 0)}
    assert got == {(1, 0), (3, 0), (0, 1), (0, 3)}


def test_hex_origin_neighbors():
    p = build_patch("hexagonal", (4, 4))
    assert [p.coords[j] for j in p.neighbors(0)] == [(1, 0), (3, 0), (0, 1)]
    # odd parity vertex looks down
    assert p.coords[p.neighbors(p.index((1, 0)))[2]] == (1, 3)


def test_hex_odd_wrapped_rejected():
    with pytest.raises(PatchError):
        build_patch("hexagonal", (3, 4))
    build_patch("hexagonal", (3, 4), wrap=False)


@pytest.mark.parametrize("dims", [(0, 3), (-1, 2)])
def test_bad_extents(dims):
    with pytest.raises(PatchError):
        build_patch("square", dims)


def test_out_of_range_vertex():
    p = build_patch("square", (2, 2))
    with pytest.raises(IndexError):
        p.neighbors(4)


def test_open_window_interior():
    p = build_patch("square", (4, 3), wrap=False)
    interior = {p.coords[i] for i in np.nonzero(p.interior)[0]}
    assert interior == {(1, 1), (2, 1)}


def test_tree_spine():
    p = build_patch("binary_tree", (3, 2))
    v = p.index((0, 0, 0))
    got = [p.coords[j] for j in p.neighbors(v)]
    assert got == [(-1, 0, 0), (1, 0, 0), (0, 1, 0)]
    assert p.interior[v]
    # leaves and spine ends are boundary
    assert not p.interior[p.index((3, 0, 0))]
    assert not p.interior[p.index((0, 2, 1))]
    assert p.interior[p.index((0, 1, 0))]


def test_translate_identity_and_order():
    p = build_patch("square", (4, 4))
    assert np.array_equal(translate(p, (0, 0)), np.arange(16))
    t = translate(p, (2, 0))
    assert np.array_equal(t[t], np.arange(16))


def test_translate_hex_parity():
    p = build_patch("hexagonal", (4, 4))
    with pytest.raises(PatchError):
        translate(p, (1, 0))
    assert len(translation_shifts(p)) == 4


def test_translate_needs_wrap():
    with pytest.raises(PatchError):
        translate(build_patch("square", (4, 4), wrap=False), (1, 0))


def test_period_vectors():
    with pytest.raises(ValueError):
        PeriodVectors((1, 2), (2, 4))
    with pytest.raises(ValueError):
        PeriodVectors((2, 0), (1, 2)).check_kind(GridKind.HEXAGONAL)
    assert PeriodVectors((2, 0), (0, 2)).determinant == 4


kinds_dims = st.sampled_from(
    [("square", (3, 4)), ("triangular", (4, 3)), ("hexagonal", (4, 6)), ("path", (5,)), ("square", (2, 2))]
)


@settings(max_examples=30, deadline=None)
@given(kinds_dims, st.booleans())
def test_symmetric_adjacency(kd, wrap):
    kind, dims = kd
    p = build_patch(kind, dims, wrap)
    for i in range(p.size):
        for j in set(p.neighbors(i)):
            assert p.neighbors(i).count(j) == p.neighbors(j).count(i)
        if p.interior[i]:
            assert len(p.neighbors(i)) == p.degree


@settings(max_examples=30, deadline=None)
@given(kinds_dims, st.integers(-5, 5), st.integers(-5, 5))
def test_translation_is_automorphism(kd, sx, sy):
    kind, dims = kd
    p = build_patch(kind, dims)
    shift = (sx,) if kind == "path" else (sx, sy)
    if kind == "hexagonal":
        shift = tuple(2 * s for s in shift)
    t = translate(p, shift)
    back = translate(p, tuple(-s for s in shift))
    assert np.array_equal(back[t], np.arange(p.size))
    for i in range(p.size):
        assert sorted(t[j] for j in p.neighbors(i)) == sorted(p.neighbors(int(t[i])))
