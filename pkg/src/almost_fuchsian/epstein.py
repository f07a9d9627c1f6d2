"""Epstein surfaces in the ball model from a support function on the sphere at infinity.

A real function rho on the stereographic chart theta of S^2 determines, for
every theta, the point of the horosphere at X(theta) with signed distance rho
from the origin; the envelope of these horospheres is the Epstein surface

    p(theta) = [(|D rho|^2 + e^{2 rho} - 1) X + 2 D rho] / (|D rho|^2 + (e^rho + 1)^2)

where D rho is the round-metric gradient pushed into R^3.  Replacing rho by
rho + r moves the surface a hyperbolic distance r along its normal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

FD_STEP = 1e-5


# ---------------------------------------------------------------- sphere chart


def stereo_to_sphere(theta) -> np.ndarray:
    """X(theta) on the unit sphere, shape (..., 3); theta = inf maps to the north pole."""
    th = np.asarray(theta, dtype=complex)
    out = np.empty(th.shape + (3,))
    inf = ~np.isfinite(th)
    big = (np.abs(th) > 1) & ~inf
    small = ~big & ~inf
    z = th[small]
    s = 1 + np.abs(z) ** 2
    out[small] = np.stack([2 * z.real / s, 2 * z.imag / s, (np.abs(z) ** 2 - 1) / s], axis=-1)
    w = 1 / th[big]  # inverted chart
    s = 1 + np.abs(w) ** 2
    out[big] = np.stack([2 * w.real / s, -2 * w.imag / s, (1 - np.abs(w) ** 2) / s], axis=-1)
    out[inf] = (0.0, 0.0, 1.0)
    return out


def sphere_to_stereo(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return (X[..., 0] + 1j * X[..., 1]) / (1 - X[..., 2])


def chart_frame(theta):
    """Partial derivatives dX/dx and dX/dy at theta = x + i y."""
    th = np.asarray(theta, dtype=complex)
    x, y = th.real, th.imag
    s = 1 + x * x + y * y
    s2 = s * s
    Xx = np.stack([2 * (s - 2 * x * x) / s2, -4 * x * y / s2, 4 * x / s2], axis=-1)
    Xy = np.stack([-4 * x * y / s2, 2 * (s - 2 * y * y) / s2, 4 * y / s2], axis=-1)
    return Xx, Xy


def round_factor(theta) -> np.ndarray:
    """Conformal factor of the round metric 4 |dtheta|^2 / (1 + |theta|^2)^2."""
    return 4.0 / (1 + np.abs(np.asarray(theta, dtype=complex)) ** 2) ** 2


# ---------------------------------------------------------------- support functions


@dataclass(frozen=True)
class SupportFunction:
    """rho on the theta chart together with its chart partials.

    ``grad`` returns ``(rho_x, rho_y)``; when it is ``None`` central differences
    with step ``FD_STEP`` are used and ``analytic`` is False.
    """

    func: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]] | None = None
    label: str = ""
    analytic: bool = field(init=False, default=False)

    def __post_init__(self):
        object.__setattr__(self, "analytic", self.grad is not None)

    def __call__(self, theta) -> np.ndarray:
        return np.asarray(self.func(np.asarray(theta, dtype=complex)), dtype=float)

    def partials(self, theta):
        th = np.asarray(theta, dtype=complex)
        if self.grad is not None:
            gx, gy = self.grad(th)
            return np.broadcast_to(gx, th.shape).astype(float), np.broadcast_to(gy, th.shape).astype(float)
        h = FD_STEP
        gx = (self(th + h) - self(th - h)) / (2 * h)
        gy = (self(th + 1j * h) - self(th - 1j * h)) / (2 * h)
        return gx, gy

    def shifted(self, r: float) -> "SupportFunction":
        f, g = self.func, self.grad
        return SupportFunction(lambda th: f(th) + r, g, f"{self.label}+{r:g}")

    def composed(self, gamma: np.ndarray) -> "SupportFunction":
        """theta -> rho(gamma theta), derivatives by finite differences."""
        return SupportFunction(lambda th: self.func(sphere_mobius(gamma, th)), None, f"{self.label}o(gamma)")


def constant_support(c: float) -> SupportFunction:
    c = float(c)
    return SupportFunction(
        lambda th: np.full(np.shape(th), c),
        lambda th: (np.zeros(np.shape(th)), np.zeros(np.shape(th))),
        f"constant {c:g}",
    )


def harmonic_support(c: float, eps: float, direction=(0.0, 0.0, 1.0)) -> SupportFunction:
    """rho = c + eps <n, X(theta)>, a first-degree spherical harmonic about c."""
    n = np.asarray(direction, dtype=float)
    n = n / np.linalg.norm(n)

    def func(th):
        return c + eps * (stereo_to_sphere(th) @ n)

    def grad(th):
        Xx, Xy = chart_frame(th)
        return eps * (Xx @ n), eps * (Xy @ n)

    return SupportFunction(func, grad, f"harmonic {c:g} {eps:g}")


def sampled_support(func: Callable, label: str = "sampled") -> SupportFunction:
    """Support function given only by values; derivatives by central differences."""
    return SupportFunction(func, None, label)


# ---------------------------------------------------------------- Moebius maps of the sphere


def sphere_mobius(gamma, theta) -> np.ndarray:
    (a, b), (c, d) = np.asarray(gamma, dtype=complex)
    th = np.asarray(theta, dtype=complex)
    return (a * th + b) / (c * th + d)


def sphere_mobius_derivative(gamma, theta) -> np.ndarray:
    (a, b), (c, d) = np.asarray(gamma, dtype=complex)
    th = np.asarray(theta, dtype=complex)
    return (a * d - b * c) / (c * th + d) ** 2


def rotation_3d(gamma) -> np.ndarray:
    """The SO(3) matrix R with X(gamma theta) = R X(theta), for unitary gamma."""
    probe = np.array([1.0, 1j, 0.0])  # X = e1, e2, -e3
    src = stereo_to_sphere(probe)
    dst = stereo_to_sphere(sphere_mobius(gamma, probe))
    return np.linalg.solve(src, dst).T


# ---------------------------------------------------------------- the construction


def sphere_gradient(rho: SupportFunction, theta):
    """(D rho in R^3, |D rho|^2 in the round metric)."""
    th = np.asarray(theta, dtype=complex)
    gx, gy = rho.partials(th)
    Xx, Xy = chart_frame(th)
    scale = (1 + np.abs(th) ** 2) ** 2 / 4
    D = scale[..., None] * (gx[..., None] * Xx + gy[..., None] * Xy)
    norm2 = scale * (gx * gx + gy * gy)
    return D, norm2


def epstein_embed(rho: SupportFunction, theta) -> np.ndarray:
    """Point(s) of the Epstein surface in the unit ball, shape (..., 3)."""
    th = np.asarray(theta, dtype=complex)
    X = stereo_to_sphere(th)
    D, n2 = sphere_gradient(rho, th)
    e = np.exp(rho(th))
    den = n2 + (e + 1) ** 2
    coef = (n2 + e * e - 1) / den
    return coef[..., None] * X + 2 * D / den[..., None]


def boundary_conformal_factor(rho: SupportFunction, theta) -> np.ndarray:
    """Conformal factor e^{2 rho} 4 / (1 + |theta|^2)^2 of the metric at infinity."""
    th = np.asarray(theta, dtype=complex)
    return np.exp(2 * rho(th)) * round_factor(th)


def equivariance_residual(rho: SupportFunction, gamma, samples) -> float:
    """max |e^{2 rho(g th)} |g'(th)|^2 / (1+|g th|^2)^2 - e^{2 rho(th)} / (1+|th|^2)^2|."""
    th = np.asarray(samples, dtype=complex)
    gt = sphere_mobius(gamma, th)
    lhs = np.exp(2 * rho(gt)) * np.abs(sphere_mobius_derivative(gamma, th)) ** 2 / (1 + np.abs(gt) ** 2) ** 2
    rhs = np.exp(2 * rho(th)) / (1 + np.abs(th) ** 2) ** 2
    return float(np.max(np.abs(lhs - rhs)))


def pulled_back_support(rho: SupportFunction, gamma) -> SupportFunction:
    """rho~(theta) = rho(g theta) + log(|g'(theta)| (1 + |theta|^2) / (1 + |g theta|^2))."""

    def func(th):
        gt = sphere_mobius(gamma, th)
        jac = np.abs(sphere_mobius_derivative(gamma, th))
        return rho(gt) + np.log(jac * (1 + np.abs(th) ** 2) / (1 + np.abs(gt) ** 2))

    return SupportFunction(func, None, f"pullback({rho.label})")


def pullback_identity_residual(rho: SupportFunction, gamma, samples) -> float:
    """max |e^{2 rho(g th)} |g'(th)|^2 / (1+|g th|^2)^2 - e^{2 rho~(th)} / (1+|th|^2)^2| with rho~ the pullback."""
    th = np.asarray(samples, dtype=complex)
    gt = sphere_mobius(gamma, th)
    lhs = np.exp(2 * rho(gt)) * np.abs(sphere_mobius_derivative(gamma, th)) ** 2 / (1 + np.abs(gt) ** 2) ** 2
    rhs = np.exp(2 * pulled_back_support(rho, gamma)(th)) / (1 + np.abs(th) ** 2) ** 2
    return float(np.max(np.abs(lhs - rhs)))


def random_mobius(rng, spread: float = 1.0) -> np.ndarray:
    """Unit-determinant complex 2x2 matrix with Gaussian entries of the given spread."""
    m = spread * (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))) + np.eye(2)
    return m / np.sqrt(np.linalg.det(m))


def averaged_support(seed: SupportFunction, gamma, order: int) -> SupportFunction:
    """Support function of the metric e^{2 seed} round averaged over the cyclic group of gamma.

    ``gamma`` must have finite ``order``; the result is compatible with gamma.
    """
    gamma = np.asarray(gamma, dtype=complex)
    powers = [np.eye(2, dtype=complex)]
    for _ in range(order - 1):
        powers.append(gamma @ powers[-1])
    full = gamma @ powers[-1]
    full = full / np.sqrt(np.linalg.det(full))
    if not (np.allclose(full, np.eye(2), atol=1e-10) or np.allclose(full, -np.eye(2), atol=1e-10)):
        raise ValueError("gamma does not have the stated order")

    def func(th):
        th = np.asarray(th, dtype=complex)
        acc = np.zeros(th.shape)
        for g in powers:
            gt = sphere_mobius(g, th)
            acc += np.exp(2 * seed(gt)) * round_factor(gt) * np.abs(sphere_mobius_derivative(g, th)) ** 2
        return 0.5 * np.log(acc / order / round_factor(th))

    return SupportFunction(func, None, f"averaged({seed.label})")


def loxodromic_support(scale: float, eps: float = 0.1) -> SupportFunction:
    """Compatible with theta -> scale * theta (scale real, > 1).

    The metric e^{2 rho} round equals f |dtheta|^2 / |theta|^2 with f invariant
    under the dilation; here f = exp(2 eps cos(2 pi log|theta| / log scale)).
    """
    period = math.log(scale)

    def func(th):
        r = np.abs(th)
        return np.log((1 + r * r) / (2 * r)) + eps * np.cos(2 * np.pi * np.log(r) / period)

    return SupportFunction(func, None, f"loxodromic {scale:g} {eps:g}")


# ---------------------------------------------------------------- ball geometry


def ball_distance(p, q) -> np.ndarray:
    """Hyperbolic distance in the Poincare ball."""
    p, q = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
    d2 = np.sum((p - q) ** 2, axis=-1)
    den = (1 - np.sum(p * p, axis=-1)) * (1 - np.sum(q * q, axis=-1))
    return np.arccosh(1 + 2 * d2 / den)


def normal_flow_distances(rho: SupportFunction, theta, shifts) -> np.ndarray:
    """Distances between Ep(rho) and Ep(rho + r), shape (len(shifts), len(theta))."""
    p = epstein_embed(rho, theta)
    return np.array([ball_distance(p, epstein_embed(rho.shifted(r), theta)) for r in shifts])


def first_fundamental_form(rho: SupportFunction, theta, h: float = FD_STEP):
    """(E, F, G) of the pulled-back hyperbolic metric in the theta chart, by central differences."""
    th = np.asarray(theta, dtype=complex)
    p = epstein_embed(rho, th)
    px = (epstein_embed(rho, th + h) - epstein_embed(rho, th - h)) / (2 * h)
    py = (epstein_embed(rho, th + 1j * h) - epstein_embed(rho, th - 1j * h)) / (2 * h)
    lam = 4 / (1 - np.sum(p * p, axis=-1)) ** 2
    E = lam * np.sum(px * px, axis=-1)
    F = lam * np.sum(px * py, axis=-1)
    G = lam * np.sum(py * py, axis=-1)
    return E, F, G


def shape_operator(rho: SupportFunction, theta, dr: float = 1e-4):
    """Shape operator I^{-1} II, with II = (1/2) d/dr of the first form of Ep(rho + r) at r = 0."""
    Ep = np.stack(first_fundamental_form(rho.shifted(dr), theta))
    Em = np.stack(first_fundamental_form(rho.shifted(-dr), theta))
    I = np.stack(first_fundamental_form(rho, theta))
    II = (Ep - Em) / (4 * dr)
    E, F, G = I
    L, M, N = II
    det = E * G - F * F
    s11 = (G * L - F * M) / det
    s12 = (G * M - F * N) / det
    s21 = (E * M - F * L) / det
    s22 = (E * N - F * M) / det
    return np.array([[s11, s12], [s21, s22]]), I


EPSTEIN_HEADER = ["re_theta", "im_theta", "px", "py", "pz", "boundary_factor"]
FLOW_HEADER = ["re_theta", "im_theta", "shift", "distance", "error"]


def parse_support(text: str) -> SupportFunction:
    """``constant C`` | ``harmonic C EPS [NX NY NZ]`` | ``loxodromic SCALE [EPS]``."""
    parts = text.split()
    if not parts:
        raise ValueError("empty support-function description")
    kind, args = parts[0].lower(), parts[1:]
    try:
        vals = [float(a) for a in args]
    except ValueError as exc:
        raise ValueError(f"bad number in support function {text!r}") from exc
    if kind == "constant" and len(vals) == 1:
        return constant_support(vals[0])
    if kind == "harmonic" and len(vals) in (2, 5):
        return harmonic_support(vals[0], vals[1], vals[2:] if len(vals) == 5 else (0.0, 0.0, 1.0))
    if kind == "loxodromic" and len(vals) in (1, 2) and vals[0] > 1:
        return loxodromic_support(*vals)
    raise ValueError(f"unknown support function {text!r}")
