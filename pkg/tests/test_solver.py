import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from latticeperfect.coloring import Coloring, ColoringMatrix, MergerMap, compatible_mergers, merge_matrix
from latticeperfect.generators import path_coloring, periodic_lift
from latticeperfect.lattice import PeriodVectors, build_patch
from latticeperfect.solver import (
    Nonlinearity,
    SolverConfig,
    bisect_transition,
    count_sweep,
    has_heterogeneous_pair,
    jacobian,
    lift_solution,
    lift_via_merger,
    merger_breakdown,
    residual,
    solve_all,
    spectral_abscissa,
    stability,
)

from conftest import PHI

ANTI = ColoringMatrix.of([[0, 2], [2, 0]], 2)


def test_nagumo_form():
    f = Nonlinearity.nagumo(0.3)
    s = sympy.symbols("s")
    expr = s * (1 - s) * (s - sympy.Rational(3, 10))
    for x in (-0.7, 0.2, 0.9, 1.4):
        assert f(x) == pytest.approx(float(expr.subs(s, x)), abs=1e-14)
        assert f.derivative(x) == pytest.approx(float(sympy.diff(expr, s).subs(s, x)), abs=1e-14)
    assert f.real_roots() == [0.0, 0.3, 1.0]


def test_nagumo_range():
    for a in (0.0, 1.0, -0.1):
        with pytest.raises(ValueError):
            Nonlinearity.nagumo(a)


def test_polynomial_roots():
    assert Nonlinearity.polynomial([-2, 0, 1]).real_roots() == pytest.approx([-2**0.5, 2**0.5])
    assert Nonlinearity.polynomial([1, 0, 1]).real_roots() == []
    with pytest.raises(ValueError):
        Nonlinearity.polynomial([3])


def test_residual_examples(app_matrix):
    f = Nonlinearity.nagumo(0.4)
    assert np.all(residual(app_matrix, 0.1, f, np.zeros(4)) == 0)
    assert np.allclose(residual(app_matrix, 0.1, f, np.ones(4)), 0, atol=1e-15)
    assert residual(ANTI, 1.0, Nonlinearity.nagumo(0.5), [0, 1]).tolist() == [2.0, -2.0]
    with pytest.raises(ValueError):
        residual(ANTI, 1.0, f, [0, 1, 2])


def test_jacobian_examples(app_matrix):
    a = 0.4
    f = Nonlinearity.nagumo(a)
    j0 = jacobian(app_matrix, 0.1, f, np.zeros(4))
    assert np.allclose(np.diag(j0), -0.4 - a)
    ja = jacobian(app_matrix, 0.0, f, np.full(4, a))
    assert np.allclose(ja, np.eye(4) * a * (1 - a))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1.5, 2.5), min_size=4, max_size=4), st.floats(0.001, 1.0), st.floats(0.05, 0.95))
def test_jacobian_finite_differences(v, d, a):
    m = ColoringMatrix.of([[0, 2, 2, 0], [2, 0, 0, 2], [2, 0, 0, 2], [0, 2, 2, 0]], 4)
    f = Nonlinearity.nagumo(a)
    v = np.array(v)
    h = 1e-6
    fd = np.column_stack(
        [(residual(m, d, f, v + h * e) - residual(m, d, f, v - h * e)) / (2 * h) for e in np.eye(4)]
    )
    j = jacobian(m, d, f, v)
    assert np.linalg.norm(fd - j) <= 1e-5 * max(1.0, np.linalg.norm(j))


def test_small_system_counts():
    f = Nonlinearity.nagumo(0.5)
    s = solve_all(ANTI, 1.0, f)
    assert np.allclose(s.vectors(), [[0, 0], [0.5, 0.5], [1, 1]], atol=1e-12)
    assert len(solve_all(ANTI, 0.01, f)) == 9
    assert len(solve_all(ANTI, 0.001, f)) == 9


def test_app_solutions(app_matrix):
    s = solve_all(app_matrix, 0.005, Nonlinearity.nagumo(0.4))
    assert len(s) == 81
    assert max(r.residual_norm for r in s.records) <= 1e-10
    vs = s.vectors()
    gaps = [np.max(np.abs(vs[i] - vs[j])) for i in range(81) for j in range(i)]
    assert min(gaps) > 1e-8
    assert [tuple(r.v) for r in s.records] == sorted(tuple(r.v) for r in s.records)
    counts = merger_breakdown(s)
    assert counts[((1, 2, 3, 4),)] == 3
    assert counts[((1, 4), (2, 3))] == 6
    assert counts[((1, 2), (3, 4))] + counts[((1, 3), (2, 4))] == 12
    assert counts[((1, 4), (2,), (3,))] + counts[((1,), (2, 3), (4,))] == 36
    assert counts[()] == 24


def test_deterministic_and_threads(app_matrix, monkeypatch):
    f = Nonlinearity.nagumo(0.4)
    a = solve_all(app_matrix, 0.005, f, SolverConfig(workers=1))
    b = solve_all(app_matrix, 0.005, f, SolverConfig(workers=4))
    assert [r.v for r in a.records] == [r.v for r in b.records]


@settings(max_examples=5, deadline=None)
@given(st.permutations(range(4)))
def test_count_permutation_invariant(perm):
    m = ColoringMatrix.of([[0, 2, 2, 0], [2, 0, 0, 2], [2, 0, 0, 2], [0, 2, 2, 0]], 4).permuted(perm)
    assert len(solve_all(m, 0.005, Nonlinearity.nagumo(0.4), SolverConfig(rng_seed=7))) == 81


def test_no_real_roots_random_only():
    s = solve_all(ColoringMatrix.of([[2]], 2), 0.1, Nonlinearity.polynomial([1, 0, 1]))
    assert len(s) == 0 and "0 root-grid" in s.completeness_note


@pytest.mark.parametrize("a", [0.3, 0.4, 0.5])
@pytest.mark.parametrize("d", [0.005, 0.05])
def test_homogeneous_stability(app_matrix, a, d):
    f = Nonlinearity.nagumo(a)
    assert stability(app_matrix, d, f, np.zeros(4)).verdict == "stable"
    assert stability(app_matrix, d, f, np.ones(4)).verdict == "stable"
    rec = stability(app_matrix, d, f, np.full(4, a))
    assert rec.verdict == "unstable"
    assert rec.spectral_abscissa == pytest.approx(a * (1 - a))


def test_zero_d_diagonal():
    f = Nonlinearity.nagumo(0.4)
    assert stability(ANTI, 0.0, f, [0, 1]).verdict == "stable"


def test_spectral_abscissa_complex():
    assert spectral_abscissa(np.array([[-1.0, 2.0], [-2.0, -1.0]])) == pytest.approx(-1.0)


# ------------------------------------------------------------------ lifts


def test_lift_checkerboard():
    p = build_patch("square", (4, 4))
    c = Coloring.of(p, [(x + y) % 2 + 1 for x, y in p.coords])
    u = lift_solution(c, ColoringMatrix.of([[0, 4], [4, 0]]), [0, 1])
    assert u.values.tolist() == [float((x + y) % 2) for x, y in p.coords]


def test_lift_requires_verified():
    p = build_patch("square", (4, 4))
    c = Coloring.of(p, [1] * 15 + [2])
    with pytest.raises(ValueError):
        lift_solution(c, ColoringMatrix.of([[0, 4], [4, 0]]), [0, 1])


def test_lift_path_word():
    m = ColoringMatrix.of([[0, 2], [1, 1]], 2)
    (w,) = path_coloring(m)
    c = Coloring.of(build_patch("path", (6,)), w * 2)
    u = lift_solution(c, m, [0.25, 0.75])
    assert sorted(set(u.values.tolist())) == [0.25, 0.75]


def test_lift_through_phi5(app_matrix):
    c4, _ = periodic_lift("square", PeriodVectors((2, 0), (0, 2)))
    x, y = 0.1, 0.9
    direct = lift_solution(c4, app_matrix, [x, y, y, x])
    from latticeperfect.coloring import merge_coloring

    coarse = lift_solution(merge_coloring(c4, PHI[5]), merge_matrix(app_matrix, PHI[5]), [x, y])
    assert np.array_equal(direct.values, coarse.values)


@pytest.mark.parametrize("s", [1, 4, 5, 6])
def test_merger_transfer(app_matrix, s):
    f = Nonlinearity.nagumo(0.4)
    d = 0.005
    coarse = merge_matrix(app_matrix, PHI[s])
    sols = solve_all(coarse, d, f)
    assert len(sols) == 3 ** coarse.n
    for rec in sols.records:
        fine = lift_via_merger(rec.v, PHI[s], app_matrix, d, f)
        assert np.max(np.abs(residual(app_matrix, d, f, fine))) <= 1e-10
        # an unstable coarse mode lifts to an unstable fine mode
        if rec.verdict == "unstable":
            assert stability(app_matrix, d, f, fine).verdict == "unstable"


def test_lift_via_merger_checks(app_matrix):
    f = Nonlinearity.nagumo(0.4)
    with pytest.raises(ValueError):
        lift_via_merger([0.3, 0.2], PHI[5], app_matrix, 0.005, f)
    with pytest.raises(ValueError):
        lift_via_merger([0.0, 1.0], PHI[1])
    assert lift_via_merger([0.5], PHI[6]).tolist() == [0.5] * 4


# --------------------------------------------------------------- sweeping


def test_bifurcation_presence():
    f = Nonlinearity.nagumo(0.5)
    assert not has_heterogeneous_pair(solve_all(ANTI, 0.08, f))
    assert has_heterogeneous_pair(solve_all(ANTI, 0.05, f))


def test_bifurcation_bracket():
    f = Nonlinearity.nagumo(0.5)
    lo, hi = bisect_transition(lambda d: has_heterogeneous_pair(solve_all(ANTI, d, f)), 0.05, 0.08, 1e-4)
    assert 0.0615 < lo <= 1 / 16 <= hi < 0.0635


def test_count_sweep():
    res = count_sweep(ANTI, Nonlinearity.nagumo(0.5), [1.0, 0.5, 0.001])
    assert res.counts[0] == 3 and res.counts[-1] == 9
    assert res.changes == [(0.001, 0.5)]
