"""Equidistant foliation around a minimal surface and the dilatations between leaves.

A minimal surface with chart metric e^{2v}|dz|^2 and shape operator
[[a, b], [b, -a]] (principal curvatures +-lambda, lambda^2 = a^2 + b^2) is
pushed a signed distance r along its normal.  The resulting leaf has metric
e^{2v}(cosh r I + sinh r S)^2, and the identity map from the minimal leaf has
complex dilatation tanh(r)(a + i b).

Pointwise kernels accept scalars or numpy arrays.  Infinite endpoints in the
distance bounds are plain ``math.inf`` / ``-math.inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_R_GRID = (-8.0, -4.0, -2.0, -1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0)


def _arr(x) -> np.ndarray:
    return np.asarray(getattr(x, "values", x), dtype=float)


def _check_curvature(a, b):
    if np.any(a * a + b * b >= 1):
        raise ValueError("principal curvature must stay below 1 (a^2 + b^2 < 1)")


@dataclass(frozen=True)
class MetricField:
    """Chart components E dx^2 + 2F dx dy + G dy^2."""

    E: np.ndarray
    F: np.ndarray
    G: np.ndarray

    def __post_init__(self):
        E, F, G = (np.asarray(x, dtype=float) for x in (self.E, self.F, self.G))
        if not (np.all(E > 0) and np.all(G > 0) and np.all(E * G - F * F > 0)):
            raise ValueError("metric is not positive definite")
        object.__setattr__(self, "E", E)
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "G", G)

    @property
    def det(self) -> np.ndarray:
        return self.E * self.G - self.F * self.F

    def scaled(self, c) -> "MetricField":
        return MetricField(c * self.E, c * self.F, c * self.G)


def parallel_metric(v, a, b, r: float) -> MetricField:
    """Metric of the leaf at signed distance r from a minimal surface."""
    v, a, b = _arr(v), _arr(a), _arr(b)
    _check_curvature(a, b)
    return parallel_metric_shape(v, a, b, -a, r)


def parallel_metric_shape(v, a, b, c, r: float) -> MetricField:
    """Parallel metric e^{2v}(cosh r I + sinh r S)^2 for a general shape operator S = [[a, b], [b, c]].

    No curvature bound is imposed; the result must still be positive definite.
    """
    v, a, b, c = _arr(v), _arr(a), _arr(b), _arr(c)
    ch, sh = math.cosh(r), math.sinh(r)
    conf = np.exp(2 * v)
    E = conf * (ch * ch + 2 * a * ch * sh + sh * sh * (a * a + b * b))
    F = conf * (b * sh * (2 * ch + sh * (a + c)))
    G = conf * (ch * ch + 2 * c * ch * sh + sh * sh * (c * c + b * b))
    return MetricField(E, F, G)


def parallel_principal_curvatures(lam, r):
    """Principal curvatures (lambda1, lambda2) of the leaf at distance r."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0) or np.any(lam >= 1):
        raise ValueError("lambda must lie in [0, 1)")
    T = np.tanh(r)
    lam1 = (T - lam) / (1 - lam * T)
    lam2 = (T + lam) / (1 + lam * T)
    if lam1.ndim == 0:
        return float(lam1), float(lam2)
    return lam1, lam2


def complex_dilatation(m: MetricField) -> np.ndarray:
    """Beltrami coefficient of the identity chart map onto the metric m."""
    if not isinstance(m, MetricField):
        m = MetricField(*m)
    return (m.E - m.G + 2j * m.F) / (m.E + m.G + 2 * np.sqrt(m.det))


def leaf_dilatation_pair(lam, r1, r2):
    """|mu| of the normal-flow map between the leaves at r1 and r2, in closed form."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0) or np.any(lam >= 1):
        raise ValueError("lambda must lie in [0, 1)")
    T1, T2 = np.tanh(r1), np.tanh(r2)
    return lam * np.abs(T2 - T1) / (1 - lam * lam * T2 * T1)


def intermediate_leaf_dilatation(a, b, c, r1, r2):
    """Dilatation of the flow from the leaf at r1 (shape [[a, b], [b, c]]) to the leaf at r2."""
    a, b, c = (np.asarray(x, dtype=float) for x in (a, b, c))
    d = np.asarray(r2, dtype=float) - np.asarray(r1, dtype=float)
    ch, sh = np.cosh(d), np.sinh(d)
    return sh * (a - c + 2j * b) / (2 * ch + (a + c) * sh)


def coth_form_modulus(lam1, lam2, r1, r2):
    """|lambda2 - lambda1| / |lambda1 + lambda2 + 2 coth(r2 - r1)|; zero when r1 = r2."""
    lam1, lam2 = np.asarray(lam1, dtype=float), np.asarray(lam2, dtype=float)
    d = np.asarray(r2, dtype=float) - np.asarray(r1, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = np.abs(lam2 - lam1) / np.abs(lam1 + lam2 + 2 / np.tanh(d))
    return np.where(d == 0, 0.0, out)


def shape_eigenvalues(a, b, c):
    """Eigenvalues (smaller, larger) of [[a, b], [b, c]]."""
    a, b, c = (np.asarray(x, dtype=float) for x in (a, b, c))
    mid = 0.5 * (a + c)
    rad = np.hypot(0.5 * (a - c), b)
    return mid - rad, mid + rad


def _potential(lambda0: float, r: float) -> float:
    if r == math.inf:
        return math.log((1 + lambda0) / (1 - lambda0))
    if r == -math.inf:
        return -math.log((1 + lambda0) / (1 - lambda0))
    return 2 * math.atanh(lambda0 * math.tanh(r))


def teich_bound(lambda0: float, r1: float, r2: float) -> float:
    """Upper bound for the Teichmueller distance between the leaves at r1 and r2.

    ``r1`` may be ``-inf`` and ``r2`` ``+inf`` for the conformal boundary components.
    """
    lambda0 = float(lambda0)
    if not 0 <= lambda0 < 1:
        raise ValueError("lambda0 must lie in [0, 1)")
    if math.isnan(r1) or math.isnan(r2):
        raise ValueError("r must not be NaN")
    return 0.5 * abs(_potential(lambda0, r2) - _potential(lambda0, r1))


def boundary_dilatation(a, b, sign: int):
    """Limit of the leaf dilatation as r -> sign * infinity."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    a, b = _arr(a), _arr(b)
    _check_curvature(a, b)
    return sign * (a + 1j * b)


@dataclass(frozen=True)
class CompactifiedMetric:
    """dt^2-coefficient, the tangential part (1 - t^2) h (degenerate at t = +-1), and h itself."""

    dt2: np.ndarray
    E: np.ndarray
    F: np.ndarray
    G: np.ndarray
    representative: MetricField


def compactified_metric(v, a, b, t: float) -> CompactifiedMetric:
    """Rescaled metric in the coordinate t = tanh r, with h(z, t) = e^{2v}(I + t S)^2."""
    if not -1 <= t <= 1:
        raise ValueError("t must lie in [-1, 1]")
    v, a, b = _arr(v), _arr(a), _arr(b)
    _check_curvature(a, b)
    conf = np.exp(2 * v)
    lam2 = a * a + b * b
    hE = conf * (1 + 2 * t * a + t * t * lam2)
    hF = conf * (2 * t * b)
    hG = conf * (1 - 2 * t * a + t * t * lam2)
    f = 1 - t * t
    return CompactifiedMetric(np.ones_like(hE), f * hE, f * hF, f * hG, MetricField(hE, hF, hG))


@dataclass(frozen=True)
class FoliationLeaf:
    r: float
    metric: MetricField
    lambda1: np.ndarray
    lambda2: np.ndarray
    mu: np.ndarray
    t_param: float


def foliation_leaf(v, a, b, r: float) -> FoliationLeaf:
    a, b = _arr(a), _arr(b)
    m = parallel_metric(v, a, b, r)
    lam1, lam2 = parallel_principal_curvatures(np.sqrt(a * a + b * b), r)
    return FoliationLeaf(
        r=float(r),
        metric=m,
        lambda1=np.atleast_1d(lam1),
        lambda2=np.atleast_1d(lam2),
        mu=complex_dilatation(m),
        t_param=math.tanh(r),
    )


FOLIATE_HEADER = ["r", "max_lambda1", "max_lambda2", "max_abs_mu", "dT_bound_from_minimal"]
BOUNDS_HEADER = ["lambda0", "r1", "r2", "bound"]


def foliate_rows(v, a, b, r_grid) -> list[list]:
    """One row per leaf, sorted by r."""
    a, b = _arr(a), _arr(b)
    lam0 = float(np.max(np.sqrt(a * a + b * b))) if a.size else 0.0
    rows = []
    for r in sorted(float(x) for x in r_grid):
        leaf = foliation_leaf(v, a, b, r)
        rows.append([
            r,
            float(np.max(leaf.lambda1)),
            float(np.max(leaf.lambda2)),
            float(np.max(np.abs(leaf.mu))),
            teich_bound(lam0, 0.0, r),
        ])
    return rows
