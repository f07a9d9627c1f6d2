"""Holomorphic quadratic differentials as truncated Poincare series.

For a polynomial P the series ``alpha(z) = sum_gamma P(gamma z) gamma'(z)^2``
over a word-length ball of the group is a weight-4 automorphic form up to the
truncation error, which is measured as an automorphy residual.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numba
import numpy as np

from .moebius import FuchsianGroup, GroupElements, MobiusTransform, enumerate_group
from .surface import DirichletPolygon, SampledSurface, dirichlet_polygon

Polynomial = tuple[complex, ...]

_TERM = re.compile(
    r"\s*(?P<sign>[+-])?\s*"
    r"(?P<coef>\([^()]*\)|(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?j?|j)?"
    r"\s*(?P<mono>\*?\s*z(?:\s*\^\s*(?P<pow>\d+))?)?\s*"
)


def parse_polynomial(text: str) -> Polynomial:
    """Parse ``"1 + 0.5*z^2 - 2j*z"`` into coefficients (constant term first)."""
    coeffs: dict[int, complex] = {}
    pos = 0
    text = text.strip()
    if not text:
        raise ValueError("empty polynomial")
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m.group("coef") and not m.group("mono"):
            raise ValueError(f"cannot parse polynomial {text!r} at position {pos}")
        if pos > 0 and not m.group("sign"):
            raise ValueError(f"missing operator in polynomial {text!r} at position {pos}")
        if m.group("coef") and m.group("mono") and not m.group("mono").lstrip().startswith("*"):
            raise ValueError(f"write coefficients as c*z^k in {text!r}")
        if not m.group("coef") and m.group("mono").lstrip().startswith("*"):
            raise ValueError(f"dangling '*' in polynomial {text!r} at position {pos}")
        coef = complex(m.group("coef").strip("()")) if m.group("coef") else 1.0
        if m.group("sign") == "-":
            coef = -coef
        power = (int(m.group("pow")) if m.group("pow") else 1) if m.group("mono") else 0
        coeffs[power] = coeffs.get(power, 0) + coef
        pos = m.end()
    deg = max(coeffs)
    return tuple(complex(coeffs.get(k, 0)) for k in range(deg + 1))


def format_polynomial(P: Polynomial) -> str:
    parts = []
    for k, c in enumerate(P):
        if c == 0:
            continue
        c = complex(c)
        cs = format(c.real, "g") if c.imag == 0 else f"({c.real:g}{c.imag:+g}j)"
        mon = "" if k == 0 else ("z" if k == 1 else f"z^{k}")
        if mon and cs == "1":
            parts.append(mon)
        else:
            parts.append(cs + ("*" + mon if mon else ""))
    return " + ".join(parts) if parts else "0"


@numba.njit(cache=True)
def _moment_kernel(ar, ai, br, bi, zr, zi, nmom, block):
    """S_k(z) = sum_gamma gamma(z)^k gamma'(z)^2, summed in element order."""
    nz = zr.shape[0]
    ng = ar.shape[0]
    sr = np.zeros((nz, nmom))
    si = np.zeros((nz, nmom))
    for g0 in range(0, ng, block):
        g1 = min(ng, g0 + block)
        for j in range(nz):
            x = zr[j]
            y = zi[j]
            for g in range(g0, g1):
                # 1 / (conj(b) z + conj(a))
                dr = br[g] * x + bi[g] * y + ar[g]
                di = br[g] * y - bi[g] * x - ai[g]
                q = 1.0 / (dr * dr + di * di)
                ir = dr * q
                ii = -di * q
                nr = ar[g] * x - ai[g] * y + br[g]
                ni = ar[g] * y + ai[g] * x + bi[g]
                wr = nr * ir - ni * ii
                wi = nr * ii + ni * ir
                tr = ir * ir - ii * ii
                ti = 2.0 * ir * ii
                pr = tr * tr - ti * ti
                pi = 2.0 * tr * ti
                for k in range(nmom):
                    sr[j, k] += pr
                    si[j, k] += pi
                    pr, pi = pr * wr - pi * wi, pr * wi + pi * wr
    return sr, si


def _raw_moments(elements: GroupElements, z: np.ndarray, degree: int) -> np.ndarray:
    z = np.ascontiguousarray(z, dtype=complex)
    sr, si = _moment_kernel(
        np.ascontiguousarray(elements.a.real),
        np.ascontiguousarray(elements.a.imag),
        np.ascontiguousarray(elements.b.real),
        np.ascontiguousarray(elements.b.imag),
        np.ascontiguousarray(z.real),
        np.ascontiguousarray(z.imag),
        degree + 1,
        2048,
    )
    return (sr + 1j * si).T


def poincare_moments(elements: GroupElements, z, degree: int) -> np.ndarray:
    """Moments ``S_k(z)``, k = 0..degree, shape ``(degree + 1, len(z))``.

    When the truncated ball is invariant under rotation by 2 pi / N, points are
    folded into one sector using ``S_k(w z) = w^k S_k(z)`` for ``w^N = 1`` and
    only distinct folded points are summed.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(np.abs(z) >= 1):
        raise ValueError("evaluation points must lie in the open disk")
    N = elements.rotation_order
    if N <= 1:
        return _raw_moments(elements, z, degree)
    step = 2 * np.pi / N
    m = np.floor((np.angle(z) % (2 * np.pi)) / step).astype(np.int64) % N
    folded = z * np.exp(-1j * step * m)
    keys = np.round(np.column_stack([folded.real, folded.imag]) * 1e12).astype(np.int64)
    _, first, inverse = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.ravel()
    base = _raw_moments(elements, folded[first], degree)
    k = np.arange(degree + 1)[:, None]
    phase = np.exp(1j * step * m[None, :] * k)
    return base[:, inverse] * phase


def evaluate_series(coeffs: Polynomial, elements: GroupElements, z) -> np.ndarray:
    S = poincare_moments(elements, z, len(coeffs) - 1)
    return np.asarray(coeffs, dtype=complex) @ S


@dataclass(frozen=True)
class QuadDifferentialField:
    """Samples of alpha for alpha dz^2, at node representatives and at every chart vertex."""

    values: np.ndarray
    surface: SampledSurface
    chart_values: np.ndarray
    polynomial: Polynomial = (1.0,)
    word_length: int = 0
    residual: float = 0.0
    label: str = ""

    def __post_init__(self):
        if np.shape(self.values) != (self.surface.n,):
            raise ValueError("differential must have one value per surface node")
        if np.shape(self.chart_values) != (len(self.surface.chart_points),):
            raise ValueError("differential must have one value per chart vertex")

    def scaled(self, c: complex) -> "QuadDifferentialField":
        return QuadDifferentialField(
            c * self.values, self.surface, c * self.chart_values, self.polynomial,
            self.word_length, self.residual, self.label,
        )

    def __add__(self, other: "QuadDifferentialField") -> "QuadDifferentialField":
        if other.surface is not self.surface:
            raise ValueError("differentials live on different surfaces")
        return QuadDifferentialField(
            self.values + other.values, self.surface, self.chart_values + other.chart_values,
            (), min(self.word_length, other.word_length), max(self.residual, other.residual),
            f"{self.label}+{other.label}",
        )

    def interpolate(self, z) -> np.ndarray:
        return self.surface.interpolator(self.chart_values)(z)


def from_chart_values(S: SampledSurface, chart_values, label: str = "") -> QuadDifferentialField:
    """Wrap chart-vertex samples; the automorphy residual is read off the seams."""
    cv = np.asarray(chart_values, dtype=complex)
    return QuadDifferentialField(
        cv[S.node_chart], S, cv, (), 0, seam_automorphy_residual(S, cv), label
    )


def seam_automorphy_residual(S: SampledSurface, chart_values: np.ndarray) -> float:
    """max |alpha(g p) g'(p)^2 - alpha(p)| over glued boundary pairs, relative to max |alpha|."""
    scale = float(np.max(np.abs(chart_values)))
    if scale == 0.0:
        return 0.0
    worst = 0.0
    for k, g in enumerate(S.polygon.side_maps):
        sel = S.seam_map == k
        if not np.any(sel):
            continue
        p = S.chart_points[S.seam_src[sel]]
        d = 1.0 / (np.conj(g.b) * p + np.conj(g.a)) ** 2
        diff = chart_values[S.seam_dst[sel]] * d**2 - chart_values[S.seam_src[sel]]
        worst = max(worst, float(np.max(np.abs(diff))))
    return worst / scale


def poincare_basis(
    polys: list[Polynomial],
    G: FuchsianGroup,
    max_word_length: int,
    S: SampledSurface,
    elements: GroupElements | None = None,
) -> list[QuadDifferentialField]:
    """Several Poincare series on one surface sharing a single pass over the group."""
    if max_word_length < 2:
        raise ValueError("max_word_length must be >= 2")
    if elements is None:
        elements = enumerate_group(G, max_word_length)
    else:
        elements = elements.truncate(max_word_length)
    degree = max(len(p) for p in polys) - 1
    moments = poincare_moments(elements, S.chart_points, degree)
    out = []
    for P in polys:
        cv = np.asarray(P, dtype=complex) @ moments[: len(P)]
        out.append(
            QuadDifferentialField(
                cv[S.node_chart], S, cv, tuple(P), max_word_length,
                seam_automorphy_residual(S, cv), format_polynomial(P),
            )
        )
    return out


def poincare_series(
    P: Polynomial,
    G: FuchsianGroup,
    max_word_length: int,
    S: SampledSurface,
    elements: GroupElements | None = None,
) -> QuadDifferentialField:
    return poincare_basis([tuple(P)], G, max_word_length, S, elements)[0]


def sample_fundamental_domain(G: FuchsianGroup, count: int, seed: int = 0) -> np.ndarray:
    """Seeded random points of the Dirichlet polygon.

    If ``count`` is a multiple of the group's rotational symmetry order N, the
    sample is made of ``count / N`` points in one sector and their N rotations.
    """
    from .moebius import rotation_order

    poly: DirichletPolygon = dirichlet_polygon(G)
    N = rotation_order(G)
    rng = np.random.default_rng(seed)
    rmax = float(np.max(np.abs(poly.vertices)))
    per = count // N if N > 1 and count % N == 0 else count
    span = 2 * np.pi / N if per != count else 2 * np.pi
    pts: list[complex] = []
    while len(pts) < per:
        r = rmax * np.sqrt(rng.uniform(size=4 * per))
        th = rng.uniform(0, span, size=4 * per)
        z = r * np.exp(1j * th)
        pts.extend(z[poly.contains(z)][: per - len(pts)])
    base = np.array(pts)
    if per == count:
        return base
    return np.concatenate([base * np.exp(2j * np.pi * m / N) for m in range(N)])


def sample_automorphy_residuals(
    polys: list[Polynomial], elements: GroupElements, G: FuchsianGroup, samples
) -> np.ndarray:
    """Relative automorphy residual of each series on ``samples``.

    For each polynomial: max over samples and generators of
    ``|alpha(g z) g'(z)^2 - alpha(z)|`` divided by ``max |alpha(z)|``.
    Moments are shared, so the cost is that of the highest degree alone.
    """
    z = np.asarray(samples, dtype=complex)
    n = len(z)
    allpts = np.concatenate([z] + [g(z) for g in G.generators])
    degree = max(len(P) for P in polys) - 1
    mom = poincare_moments(elements, allpts, degree)
    out = np.empty(len(polys))
    for i, P in enumerate(polys):
        vals = np.asarray(P, dtype=complex) @ mom[: len(P)]
        base = vals[:n]
        scale = float(np.max(np.abs(base)))
        worst = 0.0
        for k, g in enumerate(G.generators):
            img = vals[(k + 1) * n : (k + 2) * n]
            d = 1.0 / (np.conj(g.b) * z + np.conj(g.a)) ** 2
            worst = max(worst, float(np.max(np.abs(img * d**2 - base))))
        out[i] = worst / scale if scale > 0 else 0.0
    return out


def sample_automorphy_residual(
    P: Polynomial, elements: GroupElements, G: FuchsianGroup, samples
) -> float:
    return float(sample_automorphy_residuals([P], elements, G, samples)[0])


def direct_series(P: Polynomial, transforms, z: complex) -> complex:
    """Plain term-by-term evaluation; slow, kept as a cross-check."""
    total = 0j
    for T in transforms:
        T = T if isinstance(T, MobiusTransform) else MobiusTransform(*T)
        den = T.b.conjugate() * z + T.a.conjugate()
        w = (T.a * z + T.b) / den
        total += sum(c * w**k for k, c in enumerate(P)) / den**4
    return total


def default_basis() -> list[Polynomial]:
    return [parse_polynomial(s) for s in ("1", "1 + z^2", "1 + z^4")]


def wp_gram(S: SampledSurface, fields: list[QuadDifferentialField]) -> np.ndarray:
    from .wp import wp_pairing

    n = len(fields)
    gram = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            gram[i, j] = wp_pairing(S, fields[i], fields[j])
    return gram


__all__ = [
    "Polynomial",
    "QuadDifferentialField",
    "default_basis",
    "direct_series",
    "evaluate_series",
    "format_polynomial",
    "from_chart_values",
    "parse_polynomial",
    "poincare_basis",
    "poincare_moments",
    "poincare_series",
    "sample_automorphy_residual",
    "sample_automorphy_residuals",
    "sample_fundamental_domain",
    "seam_automorphy_residual",
    "wp_gram",
]
