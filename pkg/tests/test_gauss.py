import cmath
import math

import numpy as np
import pytest
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from almost_fuchsian.gauss import (
    NonConvergence,
    conjugate_gradient,
    curvature_consistency,
    gauss_residual,
    log_conformal_factor,
    principal_curvature_field,
    second_fundamental_form_components,
    solve_gauss,
    write_solve_report,
)
from almost_fuchsian.poincare import QuadDifferentialField
from almost_fuchsian.surface import laplace_beltrami


def test_fuchsian_point_is_exact(coarse_surface, coarse_basis):
    d = solve_gauss(coarse_surface, coarse_basis[0], 0.0)
    assert d.newton_iters <= 2
    assert np.max(np.abs(d.u.values)) < 1e-10
    assert np.all(d.lam.values == 0)
    a, b = second_fundamental_form_components(coarse_surface, d)
    assert np.all(a.values == 0) and np.all(b.values == 0)
    assert d.almost_fuchsian


@pytest.mark.parametrize("t", [0.05, 0.3, 1.0])
def test_residual_contract(coarse_surface, coarse_basis, t):
    S = coarse_surface
    alpha = coarse_basis[1]
    d = solve_gauss(S, alpha, t, tol=1e-10)
    assert d.residual_norm < 1e-10
    # independent evaluation of the equation
    u = d.u.values
    q = np.abs(t * alpha.values) ** 2 / S.g0**2
    F = laplace_beltrami(S, u).values + 1 - np.exp(2 * u) - q * np.exp(-2 * u)
    assert np.max(np.abs(F)) < 1e-10
    assert np.max(np.abs(F - gauss_residual(S, u, q))) < 1e-12


@pytest.mark.parametrize("t", [0.1, 0.5, 2.0])
def test_solution_is_non_positive(coarse_surface, coarse_basis, t):
    d = solve_gauss(coarse_surface, coarse_basis[0], t)
    assert d.u.values.max() <= 1e-8


@pytest.mark.parametrize("phi", [0.3, math.pi / 2, 2.0, math.pi])
def test_phase_invariance(coarse_surface, coarse_basis, phi):
    t = 0.4
    d0 = solve_gauss(coarse_surface, coarse_basis[2], t)
    d1 = solve_gauss(coarse_surface, coarse_basis[2], t * cmath.exp(1j * phi))
    assert np.max(np.abs(d0.u.values - d1.u.values)) < 1e-12


def test_small_t_scaling(coarse_surface, coarse_basis):
    ratios = []
    for t in (0.04, 0.02):
        d = solve_gauss(coarse_surface, coarse_basis[0], t, tol=1e-13)
        ratios.append(np.max(np.abs(d.u.values)) / t**2)
    assert abs(ratios[0] / ratios[1] - 1) < 0.1


def test_second_fundamental_form(coarse_surface, coarse_basis):
    S = coarse_surface
    d = solve_gauss(S, coarse_basis[1], 0.7 - 0.2j)
    a, b = second_fundamental_form_components(S, d)
    lam = principal_curvature_field(S, d)
    assert np.max(np.abs(a.values**2 + b.values**2 - lam.values**2)) < 1e-12
    assert np.array_equal(lam.values, d.lam.values)
    v = log_conformal_factor(S, d)
    assert np.allclose(np.exp(2 * v.values), np.exp(2 * d.u.values) * S.g0)


def test_sign_convention_for_real_data(coarse_surface):
    S = coarse_surface
    alpha = QuadDifferentialField(S.g0.astype(complex), S, np.full(len(S.chart_points), 1.0 + 0j))
    d = solve_gauss(S, alpha, 0.2)
    a, b = second_fundamental_form_components(S, d)
    assert np.all(b.values == 0)
    assert np.all(a.values > 0)


def test_curvature_consistency(coarse_surface, coarse_basis):
    d = solve_gauss(coarse_surface, coarse_basis[0], 1.5)
    assert curvature_consistency(coarse_surface, d) < 1e-8


def test_monotone_onset(mid_surface, mid_basis):
    lam = [solve_gauss(mid_surface, mid_basis[0], t).lam.values.max() for t in (0.01, 0.02)]
    assert lam[0] < lam[1] < 1


def test_large_t_reports_failure(coarse_surface, coarse_basis):
    with pytest.raises(NonConvergence):
        solve_gauss(coarse_surface, coarse_basis[0], 5.0)


def test_continuation_within_cap(coarse_surface, coarse_basis):
    S, alpha = coarse_surface, coarse_basis[0]
    with pytest.raises(NonConvergence):
        solve_gauss(S, alpha, 2.5, max_iter=4, t_max=0.5)
    d = solve_gauss(S, alpha, 2.5, max_iter=4, t_max=3.0)
    ref = solve_gauss(S, alpha, 2.5)
    assert np.max(np.abs(d.u.values - ref.u.values)) < 1e-9


def test_warm_start_agrees_with_cold_start(coarse_surface, coarse_basis):
    S, alpha = coarse_surface, coarse_basis[0]
    cold = solve_gauss(S, alpha, 0.8, tol=1e-12)
    warm = solve_gauss(S, alpha, 0.8, tol=1e-12, u0=solve_gauss(S, alpha, 0.7).u)
    assert np.max(np.abs(cold.u.values - warm.u.values)) < 1e-11


def test_determinism(coarse_surface, coarse_basis):
    a = solve_gauss(coarse_surface, coarse_basis[2], 0.9)
    b = solve_gauss(coarse_surface, coarse_basis[2], 0.9)
    assert np.array_equal(a.u.values, b.u.values)


def test_input_validation(coarse_surface, mid_basis):
    with pytest.raises(ValueError):
        solve_gauss(coarse_surface, mid_basis[0], 0.1)
    with pytest.raises(ValueError):
        solve_gauss(coarse_surface, mid_basis[0], 0.1, tol=0)


def test_conjugate_gradient_against_direct_solve(rng):
    n = 200
    B = sp.random(n, n, density=0.05, random_state=1)
    A = (B @ B.T + sp.identity(n)).tocsr()
    b = rng.normal(size=n)
    x, it = conjugate_gradient(A, b, 1e-13)
    assert np.allclose(x, spsolve(A.tocsc(), b), atol=1e-10)
    assert it > 0


def test_conjugate_gradient_detects_indefinite():
    A = sp.diags([1.0, -2.0, 3.0]).tocsr()
    with pytest.raises(NonConvergence):
        conjugate_gradient(A, np.ones(3))


def test_solve_report(coarse_surface, coarse_basis, tmp_path):
    runs = [solve_gauss(coarse_surface, coarse_basis[0], t) for t in (0.0, 0.5j)]
    text = write_solve_report(tmp_path / "s.csv", runs).read_text()
    lines = text.splitlines()
    assert lines[0] == "t_re,t_im,newton_iters,residual,max_u,min_u,max_lambda,almost_fuchsian"
    assert lines[1].startswith("0,0,0,0,")
    assert lines[2].split(",")[1] == "0.5"
    assert "\r" not in text
