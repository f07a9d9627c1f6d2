"""Conformal factor of the minimal surface with second fundamental form Re(t alpha dz^2).

The induced metric is ``e^{2u} g0 |dz|^2`` with ``g0 = 4 / (1 - |z|^2)^2`` and u
solves

    Delta u + 1 - e^{2u} - q e^{-2u} = 0,   q = |t alpha|^2 / g0^2,

on the closed surface.  ``u = 0`` is the totally geodesic solution at t = 0,
and Newton's method is started there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from ._csvio import write_csv
from .poincare import QuadDifferentialField
from .surface import SampledSurface, ScalarField, _values

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 50
DEFAULT_T_MAX = 0.5
DEFAULT_CG_TOL = 1e-12
MAX_CONTINUATION_DEPTH = 6


class NonConvergence(RuntimeError):
    """Newton or its linear solves failed; |t| is probably outside the solvable range."""


@dataclass(frozen=True)
class MinimalSurfaceData:
    u: ScalarField
    alpha: QuadDifferentialField
    t: complex
    lam: ScalarField
    residual_norm: float
    almost_fuchsian: bool
    newton_iters: int = 0

    @property
    def surface(self) -> SampledSurface:
        return self.u.surface


def _q_field(S: SampledSurface, alpha: QuadDifferentialField, t: complex) -> np.ndarray:
    if alpha.surface is not S:
        raise ValueError("differential lives on a different surface")
    return np.abs(t * alpha.values) ** 2 / S.g0**2


def gauss_residual(S: SampledSurface, u, q: np.ndarray) -> np.ndarray:
    """F(u) = Delta u + 1 - e^{2u} - q e^{-2u} at every node."""
    u = _values(S, u)
    return -(S.stiffness @ u) / S.mass + 1.0 - np.exp(2 * u) - q * np.exp(-2 * u)


def conjugate_gradient(A: sp.spmatrix, b: np.ndarray, rtol: float = DEFAULT_CG_TOL, max_iter: int | None = None):
    """Jacobi-preconditioned CG for symmetric positive definite A.

    Returns (x, iterations).  Raises NonConvergence when a search direction has
    non-positive curvature or the iteration budget runs out.
    """
    n = b.shape[0]
    max_iter = max_iter or 10 * n
    inv_diag = 1.0 / A.diagonal()
    if np.any(~np.isfinite(inv_diag)) or np.any(inv_diag <= 0):
        raise NonConvergence("linearization is not positive definite (diagonal)")
    x = np.zeros(n)
    r = b.copy()
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return x, 0
    z = inv_diag * r
    p = z.copy()
    rz = float(r @ z)
    for it in range(1, max_iter + 1):
        Ap = A @ p
        curv = float(p @ Ap)
        if curv <= 0:
            raise NonConvergence("linearization is not positive definite")
        step = rz / curv
        x += step * p
        r -= step * Ap
        if np.linalg.norm(r) <= rtol * bnorm:
            return x, it
        z = inv_diag * r
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise NonConvergence(f"CG did not reach rtol {rtol:g} in {max_iter} iterations")


def _newton(S, q, u0, tol, max_iter, cg_tol):
    u = np.zeros(S.n) if u0 is None else np.array(_values(S, u0), dtype=float)
    M = S.mass
    F = gauss_residual(S, u, q)
    merit = 0.5 * math.fsum(M * F * F)
    for it in range(max_iter + 1):
        res = float(np.max(np.abs(F)))
        if res < tol:
            return u, res, it
        if it == max_iter:
            break
        c = 2 * np.exp(2 * u) - 2 * q * np.exp(-2 * u)
        A = (S.stiffness + sp.diags(M * c)).tocsr()
        delta, _ = conjugate_gradient(A, M * F, cg_tol)
        step = 1.0
        while True:
            trial = u + step * delta
            Ft = gauss_residual(S, trial, q)
            mt = 0.5 * math.fsum(M * Ft * Ft)
            if np.isfinite(mt) and mt <= (1 - 2e-4 * step) * merit:
                break
            step *= 0.5
            if step < 1e-8:
                raise NonConvergence(f"line search stalled at Newton step {it + 1} (residual {res:.3e})")
        u, F, merit = trial, Ft, mt
    raise NonConvergence(f"no convergence in {max_iter} Newton steps (residual {res:.3e})")


def solve_gauss(
    S: SampledSurface,
    alpha: QuadDifferentialField,
    t: complex,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    t_max: float = DEFAULT_T_MAX,
    cg_tol: float = DEFAULT_CG_TOL,
    u0=None,
) -> MinimalSurfaceData:
    """Solve the Gauss equation for ``t alpha``.

    Inside ``|t| <= t_max`` a failed solve is retried by continuation from
    ``t / 2``; beyond the cap failures are raised directly.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    t = complex(t)
    q = _q_field(S, alpha, t)
    try:
        u, res, iters = _newton(S, q, u0, tol, max_iter, cg_tol)
    except NonConvergence:
        if abs(t) > t_max:
            raise
        u, res, iters = _continuation(S, alpha, t, tol, max_iter, cg_tol, MAX_CONTINUATION_DEPTH)
    return _package(S, alpha, t, u, res, iters)


def _continuation(S, alpha, t, tol, max_iter, cg_tol, depth):
    if depth == 0:
        raise NonConvergence(f"continuation exhausted at |t| = {abs(t):.3g}")
    half = _q_field(S, alpha, t / 2)
    try:
        u_half, _, k_half = _newton(S, half, None, tol, max_iter, cg_tol)
    except NonConvergence:
        u_half, _, k_half = _continuation(S, alpha, t / 2, tol, max_iter, cg_tol, depth - 1)
    u, res, k = _newton(S, _q_field(S, alpha, t), u_half, tol, max_iter, cg_tol)
    return u, res, k + k_half


def _package(S, alpha, t, u, res, iters) -> MinimalSurfaceData:
    lam = np.abs(t * alpha.values) * np.exp(-2 * u) / S.g0
    return MinimalSurfaceData(
        u=ScalarField(u, S),
        alpha=alpha,
        t=t,
        lam=ScalarField(lam, S),
        residual_norm=res,
        almost_fuchsian=bool(np.max(lam) < 1),
        newton_iters=iters,
    )


def principal_curvature_field(S: SampledSurface, data: MinimalSurfaceData) -> ScalarField:
    """lambda = |t alpha| e^{-2u} / g0; the principal curvatures are +-lambda."""
    u = _values(S, data.u)
    return ScalarField(np.abs(data.t * data.alpha.values) * np.exp(-2 * u) / S.g0, S)


def second_fundamental_form_components(S: SampledSurface, data: MinimalSurfaceData):
    """(a, b) with shape operator [[a, b], [b, -a]] relative to the chart frame."""
    u = _values(S, data.u)
    w = data.t * data.alpha.values * np.exp(-2 * u) / S.g0
    return ScalarField(w.real.copy(), S), ScalarField(-w.imag, S)


def log_conformal_factor(S: SampledSurface, data: MinimalSurfaceData) -> ScalarField:
    """v with induced metric e^{2v} |dz|^2 in the chart."""
    return ScalarField(_values(S, data.u) + 0.5 * np.log(S.g0), S)


def curvature_consistency(S: SampledSurface, data: MinimalSurfaceData) -> float:
    """L2 norm of K(e^{2u} g0) + 1 + lambda^2, both sides evaluated independently."""
    u = _values(S, data.u)
    lap = -(S.stiffness @ u) / S.mass
    curvature = np.exp(-2 * u) * (-1.0 - lap)
    lam = principal_curvature_field(S, data).values
    gap = curvature + 1.0 + lam**2
    return math.sqrt(math.fsum(S.mass * gap * gap))


SOLVE_HEADER = ["t_re", "t_im", "newton_iters", "residual", "max_u", "min_u", "max_lambda", "almost_fuchsian"]


def solve_row(data: MinimalSurfaceData) -> list:
    u = data.u.values
    return [
        data.t.real, data.t.imag, data.newton_iters, data.residual_norm,
        float(u.max()), float(u.min()), float(data.lam.values.max()), data.almost_fuchsian,
    ]


def write_solve_report(path: str | Path, runs: list[MinimalSurfaceData]) -> Path:
    return write_csv(path, SOLVE_HEADER, (solve_row(d) for d in runs))
