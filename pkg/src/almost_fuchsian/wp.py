"""Area of the minimal surfaces Sigma(t alpha) and its variations at the Fuchsian point.

The area is critical at t = 0, and its mixed complex second derivative
d^2/ds-bar dt |Sigma(t alpha + s beta)| should equal minus the Weil-Petersson
pairing of alpha and beta.  Both sides are computed on the same mesh.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._csvio import write_csv
from .gauss import DEFAULT_MAX_ITER, DEFAULT_T_MAX, NonConvergence, solve_gauss
from .poincare import QuadDifferentialField
from .surface import SampledSurface, _values

WP_TOL = 1e-11


def wp_pairing(S: SampledSurface, alpha: QuadDifferentialField, beta: QuadDifferentialField) -> complex:
    """<alpha, beta> = integral of alpha conj(beta) / g0^2 against hyperbolic area."""
    a = np.asarray(alpha.values if isinstance(alpha, QuadDifferentialField) else alpha, dtype=complex)
    b = np.asarray(beta.values if isinstance(beta, QuadDifferentialField) else beta, dtype=complex)
    if a.shape != (S.n,) or b.shape != (S.n,):
        raise ValueError("differentials must have one value per surface node")
    w = S.mass / S.g0**2
    # written out so that swapping the arguments conjugates the result exactly
    re = a.real * b.real + a.imag * b.imag
    im = a.imag * b.real - a.real * b.imag
    return complex(math.fsum(w * re), math.fsum(w * im))


def area(S: SampledSurface, u) -> float:
    """Area of e^{2u} g0 |dz|^2."""
    return math.fsum(S.mass * np.exp(2 * _values(S, u)))


def _combined(alpha: QuadDifferentialField, beta: QuadDifferentialField | None, t: complex, s: complex):
    """Field and scale for t alpha + s beta, normalised so the scale is the larger modulus."""
    scale = max(abs(t), abs(s))
    if scale == 0:
        return alpha, 0.0
    field = alpha.scaled(t / scale)
    if beta is not None and s != 0:
        field = field + beta.scaled(s / scale)
    return field, scale


def area_at(S, alpha, beta, t, s, tol=WP_TOL, u0=None, **solver):
    field, scale = _combined(alpha, beta, complex(t), complex(s))
    data = solve_gauss(S, field, scale, tol=tol, u0=u0, **solver)
    return area(S, data.u), data


def first_variation_check(S: SampledSurface, alpha: QuadDifferentialField, t_list, tol: float = WP_TOL, **solver):
    """[(t, |area(t) - area(0)|)] for each t."""
    base = S.total_mass
    out = []
    for t in t_list:
        A, _ = area_at(S, alpha, None, t, 0, tol=tol, **solver)
        out.append((complex(t) if isinstance(t, complex) else float(t), abs(A - base)))
    return out


def loglog_slope(pairs) -> float:
    """Least-squares slope of log|dA| against log|t|."""
    x = np.log([abs(t) for t, _ in pairs])
    y = np.log([d for _, d in pairs])
    return float(np.polyfit(x, y, 1)[0])


@dataclass(frozen=True)
class WpReport:
    alpha_id: str
    beta_id: str
    fd_value: complex
    wp_value: complex
    rel_error: float
    step: float
    resolution: int
    word_length: int


class CornerFailure(NonConvergence):
    def __init__(self, corner, cause):
        super().__init__(f"solve failed at corner (t1, t2, s1, s2) = {corner}: {cause}")
        self.corner = corner


# (derivative pair, real-direction unit for t, for s)
_MIXED = {
    "t1s1": (1, 1),
    "t2s2": (1j, 1j),
    "t1s2": (1, 1j),
    "t2s1": (1j, 1),
}


def second_variation_fd(
    S: SampledSurface,
    alpha: QuadDifferentialField,
    beta: QuadDifferentialField,
    h: float = 0.05,
    tol: float = WP_TOL,
    alpha_id: str | None = None,
    beta_id: str | None = None,
    max_iter: int = DEFAULT_MAX_ITER,
    t_max: float = DEFAULT_T_MAX,
) -> WpReport:
    """Wirtinger derivative d^2 A / ds-bar dt at 0 from 16 corner solves."""
    if not h > 0:
        raise ValueError("step must be positive")
    partials = {}
    warm = None
    for name, (tu, su) in _MIXED.items():
        acc = []
        for sgn_t, sgn_s in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
            t = sgn_t * h * tu
            s = sgn_s * h * su
            try:
                A, data = area_at(S, alpha, beta, t, s, tol=tol, u0=warm, max_iter=max_iter, t_max=t_max)
            except NonConvergence as exc:
                t, s = complex(t), complex(s)
                corner = (t.real, t.imag, s.real, s.imag)
                raise CornerFailure(corner, exc) from exc
            warm = data.u
            acc.append(sgn_t * sgn_s * A)
        partials[name] = math.fsum(acc) / (4 * h * h)
    fd = 0.25 * complex(partials["t1s1"] + partials["t2s2"], partials["t1s2"] - partials["t2s1"])
    wp = wp_pairing(S, alpha, beta)
    rel = abs(fd + wp) / abs(wp) if wp != 0 else math.inf
    return WpReport(
        alpha_id=alpha_id or alpha.label,
        beta_id=beta_id or beta.label,
        fd_value=fd,
        wp_value=wp,
        rel_error=rel,
        step=h,
        resolution=S.resolution,
        word_length=alpha.word_length,
    )


WP_HEADER = ["alpha_id", "beta_id", "resolution", "word_len", "h", "fd_re", "fd_im", "wp_re", "wp_im", "rel_error"]


def report_row(r: WpReport) -> list:
    return [
        r.alpha_id, r.beta_id, r.resolution, r.word_length, r.step,
        r.fd_value.real, r.fd_value.imag, r.wp_value.real, r.wp_value.imag, r.rel_error,
    ]


def write_wp_report(path: str | Path, reports: list[WpReport]) -> Path:
    return write_csv(path, WP_HEADER, (report_row(r) for r in reports))
