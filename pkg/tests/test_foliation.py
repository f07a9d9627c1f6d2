import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from almost_fuchsian.foliation import (
    DEFAULT_R_GRID,
    MetricField,
    boundary_dilatation,
    compactified_metric,
    complex_dilatation,
    coth_form_modulus,
    foliate_rows,
    foliation_leaf,
    intermediate_leaf_dilatation,
    leaf_dilatation_pair,
    parallel_metric,
    parallel_metric_shape,
    parallel_principal_curvatures,
    shape_eigenvalues,
    teich_bound,
)

lams = st.floats(0, 0.999)
radii = st.floats(-6, 6)


def _shape(rng, n):
    rad = np.sqrt(rng.uniform(0, 0.99**2, n))
    ph = rng.uniform(0, 2 * np.pi, n)
    return rng.normal(size=n), rad * np.cos(ph), rad * np.sin(ph)


def test_parallel_metric_at_zero(rng):
    v, a, b = _shape(rng, 50)
    m = parallel_metric(v, a, b, 0.0)
    assert np.allclose(m.E, np.exp(2 * v), rtol=1e-15)
    assert np.array_equal(m.E, m.G) and np.all(m.F == 0)


@pytest.mark.parametrize("r", [-3.0, -0.7, 0.4, 2.5])
def test_parallel_metric_determinant(rng, r):
    v, a, b = _shape(rng, 200)
    m = parallel_metric(v, a, b, r)
    lam2 = a * a + b * b
    expected = np.exp(4 * v) * (math.cosh(r) ** 2 - lam2 * math.sinh(r) ** 2) ** 2
    assert np.max(np.abs(m.det - expected) / expected) < 1e-12


def test_fuchsian_leaf_is_scaled(rng):
    v = rng.normal(size=20)
    m = parallel_metric(v, np.zeros(20), np.zeros(20), 1.3)
    assert np.allclose(m.E, math.cosh(1.3) ** 2 * np.exp(2 * v), rtol=1e-14)
    assert np.all(m.F == 0)


def test_curvature_bound_enforced():
    with pytest.raises(ValueError):
        parallel_metric(0.0, 0.8, 0.6, 1.0)
    with pytest.raises(ValueError):
        boundary_dilatation(1.0, 0.0, 1)
    with pytest.raises(ValueError):
        compactified_metric(0.0, 0.9, 0.5, 0.0)


def test_general_shape_reduces_to_minimal(rng):
    v, a, b = _shape(rng, 30)
    m1 = parallel_metric(v, a, b, 0.9)
    m2 = parallel_metric_shape(v, a, b, -a, 0.9)
    assert np.array_equal(m1.E, m2.E) and np.array_equal(m1.F, m2.F)


def test_principal_curvature_examples():
    assert parallel_principal_curvatures(0.3, 0.0) == (-0.3, 0.3)
    t = math.tanh(0.8)
    assert np.allclose(parallel_principal_curvatures(0.0, 0.8), (t, t), rtol=1e-15, atol=0)
    with pytest.raises(ValueError):
        parallel_principal_curvatures(1.0, 0.0)


@given(lams, radii)
def test_principal_curvatures_ordered_and_bounded(lam, r):
    l1, l2 = parallel_principal_curvatures(lam, r)
    assert -1 <= l1 <= l2 <= 1


def test_principal_curvature_limits():
    for lam in (0.0, 0.3, 0.9, 0.999):
        for sgn in (1, -1):
            l1, l2 = parallel_principal_curvatures(lam, sgn * 20.0)
            assert abs(l1) > 1 - 1e-6 and abs(l2) > 1 - 1e-6


def test_conformal_metric_has_zero_dilatation():
    assert complex_dilatation(MetricField(2.0, 0.0, 2.0)) == 0


def test_dilatation_formula_example():
    mu = complex_dilatation(MetricField(2.0, 0.0, 1.0))
    assert abs(mu - (3 - 2 * math.sqrt(2))) < 1e-15


def test_dilatation_rejects_indefinite():
    with pytest.raises(ValueError):
        complex_dilatation(MetricField(1.0, 2.0, 1.0))
    with pytest.raises(ValueError):
        complex_dilatation((1.0, 0.0, -1.0))


@given(st.floats(-3, 3), st.floats(0, 0.99), st.floats(0, 2 * math.pi), radii)
@settings(max_examples=300)
def test_dilatation_pipeline(v, rad, phase, r):
    a, b = rad * math.cos(phase), rad * math.sin(phase)
    mu = complex_dilatation(parallel_metric(v, a, b, r))
    assert abs(mu - math.tanh(r) * complex(a, b)) < 1e-12
    assert abs(mu) < 1


def test_boundary_dilatation_limit(rng):
    v, a, b = _shape(rng, 100)
    plus = boundary_dilatation(a, b, 1)
    assert np.max(np.abs(complex_dilatation(parallel_metric(v, a, b, 20.0)) - plus)) < 1e-6
    assert np.array_equal(boundary_dilatation(a, b, -1), -plus)
    assert np.allclose(np.abs(plus), np.hypot(a, b))
    assert boundary_dilatation(0.0, 0.0, 1) == 0
    with pytest.raises(ValueError):
        boundary_dilatation(a, b, 0)


def test_leaf_pair_examples():
    assert leaf_dilatation_pair(0.4, 1.2, 1.2) == 0
    assert leaf_dilatation_pair(0.4, 0.0, 1.1) == pytest.approx(0.4 * math.tanh(1.1), rel=1e-15)
    assert leaf_dilatation_pair(0.4, 0.0, -1.1) == pytest.approx(0.4 * math.tanh(1.1), rel=1e-15)


@given(lams, st.floats(-3, 3), st.floats(-3, 3))
@settings(max_examples=500)
def test_leaf_chain(lam, r1, r2):
    l1, l2 = parallel_principal_curvatures(lam, r1)
    m6 = abs(intermediate_leaf_dilatation(l1, 0.0, l2, r1, r2))
    m7 = float(coth_form_modulus(l1, l2, r1, r2))
    m8 = float(leaf_dilatation_pair(lam, r1, r2))
    assert abs(m6 - m7) < 1e-12 and abs(m6 - m8) < 1e-12
    if r1 != r2:
        assert m8 < abs(math.tanh(r2 - r1))


@pytest.mark.parametrize("lam", [0.1, 0.5, 0.9])
@pytest.mark.parametrize("r1", [-2.0, -1.0, 1.0, 2.0])
@pytest.mark.parametrize("r2", [-2.0, -1.0, 1.0, 2.0])
def test_leaf_chain_grid(lam, r1, r2):
    l1, l2 = parallel_principal_curvatures(lam, r1)
    assert abs(abs(intermediate_leaf_dilatation(l1, 0.0, l2, r1, r2)) - leaf_dilatation_pair(lam, r1, r2)) < 1e-12


def test_intermediate_reduces_to_minimal_leaf():
    lam, r2 = 0.35, 0.8
    mu = intermediate_leaf_dilatation(lam, 0.0, -lam, 0.0, r2)
    assert abs(mu - math.tanh(r2) * lam) < 1e-15
    assert intermediate_leaf_dilatation(0.2, 0.1, 0.3, 0.7, 0.7) == 0
    assert coth_form_modulus(0.1, 0.3, 0.7, 0.7) == 0


def test_intermediate_on_rotated_frames(rng):
    # a rotated shape matrix has the same eigenvalues, so the same modulus
    l1, l2 = -0.3, 0.6
    for th in rng.uniform(0, np.pi, 10):
        c, s = math.cos(th), math.sin(th)
        A = np.array([[c, -s], [s, c]]) @ np.diag([l1, l2]) @ np.array([[c, s], [-s, c]])
        mu = intermediate_leaf_dilatation(A[0, 0], A[0, 1], A[1, 1], 0.2, 1.5)
        assert abs(abs(mu) - coth_form_modulus(l1, l2, 0.2, 1.5)) < 1e-14
        e1, e2 = shape_eigenvalues(A[0, 0], A[0, 1], A[1, 1])
        assert abs(e1 - l1) < 1e-14 and abs(e2 - l2) < 1e-14


@given(st.floats(0.01, 0.99), st.floats(-4, 4), st.floats(-4, 4))
def test_pair_modulus_increases_with_lambda(lam, r1, r2):
    if abs(r1 - r2) < 1e-3:
        return
    assert leaf_dilatation_pair(lam, r1, r2) < leaf_dilatation_pair(min(lam + 0.005, 0.999), r1, r2)


def test_teich_bound_examples():
    assert teich_bound(0.0, -math.inf, math.inf) == 0
    assert teich_bound(0.0, 1.0, 2.0) == 0
    assert teich_bound(0.5, 0.0, math.inf) == pytest.approx(0.5 * math.log(3), rel=1e-15)
    assert abs(teich_bound(0.5, 0.0, math.inf) - 0.549306) < 1e-6
    for lam in (0.1, 0.5, 0.9, 0.99):
        full = math.log((1 + lam) / (1 - lam))
        assert teich_bound(lam, -math.inf, math.inf) == full
        assert 2 * teich_bound(lam, 0.0, math.inf) == full
        assert abs(teich_bound(lam, 0.0, 20.0) - teich_bound(lam, 0.0, math.inf)) < 1e-6
        assert abs(teich_bound(lam, -20.0, 0.0) - teich_bound(lam, -math.inf, 0.0)) < 1e-6
    with pytest.raises(ValueError):
        teich_bound(1.0, 0.0, 1.0)


@given(lams, st.lists(st.floats(-10, 10), min_size=3, max_size=3))
def test_teich_bound_additive(lam, rs):
    r1, r2, r3 = sorted(rs)
    lhs = teich_bound(lam, r1, r3)
    assert abs(lhs - teich_bound(lam, r1, r2) - teich_bound(lam, r2, r3)) < 1e-12 * max(1.0, lhs)


def test_compactified_metric(rng):
    v, a, b = _shape(rng, 40)
    c0 = compactified_metric(v, a, b, 0.0)
    assert np.allclose(c0.E, np.exp(2 * v)) and np.all(c0.F == 0)
    assert np.all(c0.dt2 == 1)
    for sgn in (1, -1):
        cb = compactified_metric(v, a, b, float(sgn))
        assert np.all(cb.E == 0) and np.all(cb.G == 0)
        assert np.max(np.abs(complex_dilatation(cb.representative) - boundary_dilatation(a, b, sgn))) < 1e-12
    # the rescaled leaf metric is the representative at t = tanh r
    r = 1.7
    leaf = parallel_metric(v, a, b, r).scaled(1 / math.cosh(r) ** 2)
    rep = compactified_metric(v, a, b, math.tanh(r)).representative
    assert np.allclose(leaf.E, rep.E, rtol=1e-12) and np.allclose(leaf.F, rep.F, rtol=1e-12, atol=1e-14)
    # entries vary continuously: jumps shrink with the grid step
    ts = np.linspace(-1, 1, 2001)
    E = np.array([compactified_metric(v[0], a[0], b[0], t).E[()] for t in ts])
    assert np.max(np.abs(np.diff(E))) < 10 * np.exp(2 * v[0]) * (ts[1] - ts[0])


def test_leaf_record(rng):
    v, a, b = _shape(rng, 25)
    leaf = foliation_leaf(v, a, b, -0.6)
    assert leaf.t_param == math.tanh(-0.6)
    assert np.all(leaf.lambda1 <= leaf.lambda2)
    assert np.all(np.abs(leaf.mu) < 1)


def test_foliate_rows(rng):
    v, a, b = _shape(rng, 25)
    rows = foliate_rows(v, a, b, DEFAULT_R_GRID)
    rs = [row[0] for row in rows]
    assert rs == sorted(rs) and len(rs) == 13
    lam0 = float(np.max(np.hypot(a, b)))
    for row in rows:
        assert row[4] == pytest.approx(teich_bound(lam0, 0.0, row[0]), rel=1e-13, abs=1e-15)
    # bound column grows with |r|
    pos = [row[4] for row in rows if row[0] >= 0]
    assert pos == sorted(pos)
    zero = foliate_rows(v, 0 * a, 0 * b, DEFAULT_R_GRID)
    assert all(row[3] == 0 and row[4] == 0 for row in zero)
