"""Discretisation of the closed surface D/Gamma in a single disk chart.

The fundamental domain is the Dirichlet polygon of the generators centred at
0.  It is cut into one sector per side and each sector carries a structured
triangulation whose outer row follows the geodesic side, sampled uniformly in
hyperbolic arc length so that paired sides match point for point.  Chart
vertices on paired sides (and the polygon corners) are glued into single
surface nodes.

Stiffness uses Euclidean cotangent weights in the chart (the Dirichlet energy
is conformally invariant); the lumped mass uses exact hyperbolic areas of the
geodesic triangles, so the total mass is 4 pi (genus - 1) up to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from ._csvio import write_csv
from .moebius import FuchsianGroup, MobiusTransform

MIN_ANGLE_DEG = 1.0


def conformal_factor(z) -> np.ndarray:
    """Hyperbolic metric density g0 = 4 / (1 - |z|^2)^2."""
    z = np.asarray(z)
    return 4.0 / (1.0 - np.abs(z) ** 2) ** 2


def hyperbolic_distance(z, w) -> np.ndarray:
    z, w = np.asarray(z, dtype=complex), np.asarray(w, dtype=complex)
    num = 2.0 * np.abs(z - w) ** 2
    den = (1.0 - np.abs(z) ** 2) * (1.0 - np.abs(w) ** 2)
    return np.arccosh(1.0 + num / den)


def _to_origin(p: complex):
    return lambda z: (z - p) / (1.0 - np.conj(p) * z)


def _from_origin(p: complex):
    return lambda w: (w + p) / (1.0 + np.conj(p) * w)


def geodesic_points(p: complex, q: complex, fractions) -> np.ndarray:
    """Points on the geodesic segment p -> q at given fractions of its hyperbolic length."""
    fractions = np.asarray(fractions, dtype=float)
    w = _to_origin(p)(q)
    length = 2.0 * math.atanh(abs(w))
    pts = np.tanh(fractions * length / 2.0) * (w / abs(w))
    return _from_origin(p)(pts)


def geodesic_triangle_area(z1, z2, z3) -> np.ndarray:
    """Hyperbolic area (angle defect) of geodesic triangles given by vertex arrays."""

    def angle(p, q, r):
        t = _to_origin(p)
        return np.abs(np.angle(t(q) / t(r)))

    return np.pi - angle(z1, z2, z3) - angle(z2, z3, z1) - angle(z3, z1, z2)


def _bisector_circle(p: complex) -> tuple[complex, float]:
    """Centre and radius of the perpendicular bisector of 0 and p (a geodesic)."""
    r = abs(p)
    m = r / (1.0 + math.sqrt(1.0 - r * r))  # hyperbolic midpoint, Euclidean radius
    u = p / r
    return u * (1.0 + m * m) / (2.0 * m), (1.0 - m * m) / (2.0 * m)


def _circle_intersection_in_disk(c1: complex, r1: float, c2: complex, r2: float) -> complex:
    d = abs(c2 - c1)
    a = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d)
    h = math.sqrt(max(r1 * r1 - a * a, 0.0))
    base = c1 + a * (c2 - c1) / d
    perp = 1j * (c2 - c1) / d
    cands = [base + h * perp, base - h * perp]
    return min(cands, key=abs)


@dataclass(frozen=True)
class DirichletPolygon:
    """Sides sorted by angle; side k is the bisector of 0 and sides[k](0)."""

    side_maps: tuple[MobiusTransform, ...]
    side_generator: tuple[int, ...]  # index into the symmetric generator list
    vertices: np.ndarray  # vertices[k] starts side k (counter-clockwise)

    @property
    def n_sides(self) -> int:
        return len(self.side_maps)

    def partner(self, k: int) -> int:
        """Side k' with side_maps[k] carrying side k' onto side k."""
        inv = self.side_maps[k].inverse()
        return min(range(self.n_sides), key=lambda j: self.side_maps[j].distance(inv))

    def contains(self, z, tol: float = 1e-12) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        d0 = hyperbolic_distance(z, 0.0)
        ok = np.ones(z.shape, dtype=bool)
        for g in self.side_maps:
            ok &= d0 <= hyperbolic_distance(z, g.b / np.conj(g.a)) + tol
        return ok


def dirichlet_polygon(G: FuchsianGroup) -> DirichletPolygon:
    gens = G.symmetric_generators
    centres = [g.b / g.a.conjugate() for g in gens]
    order = sorted(range(len(gens)), key=lambda i: np.angle(centres[i]) % (2 * np.pi))
    circles = [_bisector_circle(centres[i]) for i in order]
    n = len(order)
    verts = np.array(
        [_circle_intersection_in_disk(*circles[k - 1], *circles[k]) for k in range(n)]
    )
    return DirichletPolygon(tuple(gens[i] for i in order), tuple(order), verts)


@dataclass(frozen=True)
class SampledSurface:
    group: FuchsianGroup
    resolution: int
    polygon: DirichletPolygon
    points: np.ndarray  # representative chart coordinate per surface node
    node_chart: np.ndarray  # chart vertex used as each node's representative
    mass: np.ndarray
    stiffness: sp.csr_matrix
    chart_points: np.ndarray
    chart_node: np.ndarray  # chart vertex -> surface node
    triangles: np.ndarray  # chart vertex indices
    seam_src: np.ndarray  # chart vertex p
    seam_dst: np.ndarray  # chart vertex p' with side_map(p) = p'
    seam_map: np.ndarray  # index into polygon.side_maps
    genus: int
    chart_boundary: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def g0(self) -> np.ndarray:
        return conformal_factor(self.points)

    @property
    def total_mass(self) -> float:
        return math.fsum(self.mass)

    @property
    def node_triangles(self) -> np.ndarray:
        return self.chart_node[self.triangles]

    def seam_residual(self) -> float:
        """max |side_map(p) - p'| over identified boundary pairs."""
        worst = 0.0
        for k, g in enumerate(self.polygon.side_maps):
            sel = self.seam_map == k
            if not np.any(sel):
                continue
            img = g(self.chart_points[self.seam_src[sel]])
            worst = max(worst, float(np.max(np.abs(img - self.chart_points[self.seam_dst[sel]]))))
        return worst

    def interpolator(self, chart_values):
        """Barycentric linear interpolant over the chart triangulation."""
        from matplotlib.tri import LinearTriInterpolator, Triangulation

        tri = Triangulation(self.chart_points.real, self.chart_points.imag, self.triangles)
        vals = np.asarray(chart_values)
        if np.iscomplexobj(vals):
            re = LinearTriInterpolator(tri, vals.real)
            im = LinearTriInterpolator(tri, vals.imag)
            return lambda z: _masked(re, z) + 1j * _masked(im, z)
        f = LinearTriInterpolator(tri, vals)
        return lambda z: _masked(f, z)


def _masked(interp, z):
    z = np.asarray(z, dtype=complex)
    out = interp(z.real, z.imag)
    return np.ma.filled(out.astype(float), np.nan)


def _sector_mesh(polygon: DirichletPolygon, n: int):
    """Structured sector triangulation; returns chart points, triangles, boundary rows."""
    ns = polygon.n_sides
    index: dict[tuple[int, int, int], int] = {}
    pts: list[complex] = []

    def key(k, i, j):
        if i == 0:
            return (0, 0, 0)
        if j == i:
            return ((k + 1) % ns, i, 0)
        return (k, i, j)

    for k in range(ns):
        v0, v1 = polygon.vertices[k], polygon.vertices[(k + 1) % ns]
        for i in range(n + 1):
            if i == 0:
                row = np.zeros(1, dtype=complex)
            else:
                # radially scaled copy of the geodesic side; row n is the side itself
                row = (i / n) * geodesic_points(v0, v1, np.arange(i + 1) / i)
                row[0], row[-1] = (i / n) * v0, (i / n) * v1
            for j in range(i + 1):
                kk = key(k, i, j)
                if kk not in index:
                    index[kk] = len(pts)
                    pts.append(row[j])
    tris = []
    for k in range(ns):
        for i in range(n):
            for j in range(i + 1):
                a, b, c = index[key(k, i, j)], index[key(k, i + 1, j)], index[key(k, i + 1, j + 1)]
                tris.append((a, b, c))
                if j < i:
                    d = index[key(k, i, j + 1)]
                    tris.append((a, c, d))
    boundary = np.array([[index[key(k, n, j)] for j in range(n + 1)] for k in range(ns)])
    return np.array(pts), np.array(tris, dtype=np.int64), boundary


def _triangle_angles(P: np.ndarray, tris: np.ndarray) -> np.ndarray:
    z = P[tris]
    out = np.empty(tris.shape)
    for c in range(3):
        u = z[:, (c + 1) % 3] - z[:, c]
        v = z[:, (c + 2) % 3] - z[:, c]
        out[:, c] = np.abs(np.angle(v / u))
    return out


def cotangent_stiffness(P: np.ndarray, tris: np.ndarray, node: np.ndarray, n_nodes: int) -> sp.csr_matrix:
    """Assemble the P1 Dirichlet form from chart triangle geometry."""
    z = P[tris]
    rows, cols, vals = [], [], []
    for c in range(3):
        i, j = node[tris[:, (c + 1) % 3]], node[tris[:, (c + 2) % 3]]
        u = z[:, (c + 1) % 3] - z[:, c]
        v = z[:, (c + 2) % 3] - z[:, c]
        cross = u.real * v.imag - u.imag * v.real
        dot = u.real * v.real + u.imag * v.imag
        w = 0.5 * dot / np.abs(cross)
        rows += [i, j, i, j]
        cols += [j, i, i, j]
        vals += [-w, -w, w, w]
    K = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n_nodes, n_nodes)
    ).tocsr()
    K.sum_duplicates()
    return K


class _UnionFind:
    def __init__(self, n):
        self.parent = np.arange(n)

    def find(self, i):
        p = self.parent
        root = i
        while p[root] != root:
            root = p[root]
        while p[i] != root:
            p[i], i = root, p[i]
        return root

    def union(self, i, j):
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)


def build_sampled_surface(G: FuchsianGroup, resolution: int) -> SampledSurface:
    """Triangulate the Dirichlet polygon of G with ``resolution`` segments per side."""
    if resolution < 8:
        raise ValueError("resolution must be >= 8")
    n = int(resolution)
    poly = dirichlet_polygon(G)
    P, tris, boundary = _sector_mesh(poly, n)

    angles = _triangle_angles(P, tris)
    if np.degrees(angles.min()) < MIN_ANGLE_DEG:
        raise ValueError(f"degenerate triangle: min angle {np.degrees(angles.min()):.3g} deg")

    # seam pairs: side_maps[k] carries the partner side onto side k
    src, dst, which = [], [], []
    for k in range(poly.n_sides):
        kp = poly.partner(k)
        img = poly.side_maps[k](P[boundary[kp]])
        targets = P[boundary[k]]
        for s, w in zip(boundary[kp], img):
            j = int(np.argmin(np.abs(targets - w)))
            if abs(targets[j] - w) > 1e-9:
                raise ValueError(f"side pairing mismatch on side {k}: {abs(targets[j] - w):.3g}")
            src.append(s)
            dst.append(boundary[k][j])
            which.append(k)
    uf = _UnionFind(len(P))
    for s, d in zip(src, dst):
        uf.union(s, d)
    roots = np.array([uf.find(i) for i in range(len(P))])
    uniq, chart_node = np.unique(roots, return_inverse=True)
    n_nodes = len(uniq)
    points = P[uniq]

    area = geodesic_triangle_area(P[tris[:, 0]], P[tris[:, 1]], P[tris[:, 2]])
    node_tris = chart_node[tris]
    mass = np.zeros(n_nodes)
    for c in range(3):
        np.add.at(mass, node_tris[:, c], area / 3.0)

    K = cotangent_stiffness(P, tris, chart_node, n_nodes)

    edges = np.sort(np.concatenate([node_tris[:, [0, 1]], node_tris[:, [1, 2]], node_tris[:, [2, 0]]]), axis=1)
    n_edges = len(np.unique(edges, axis=0))
    chi = n_nodes - n_edges + len(tris)
    genus = (2 - chi) // 2

    return SampledSurface(
        group=G,
        resolution=n,
        polygon=poly,
        points=points,
        node_chart=uniq,
        mass=mass,
        stiffness=K,
        chart_points=P,
        chart_node=chart_node,
        triangles=tris,
        seam_src=np.array(src),
        seam_dst=np.array(dst),
        seam_map=np.array(which),
        genus=int(genus),
        chart_boundary=boundary,
    )


@dataclass(frozen=True)
class ScalarField:
    values: np.ndarray
    surface: SampledSurface

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.shape != (self.surface.n,):
            raise ValueError(f"field has shape {v.shape}, surface has {self.surface.n} nodes")
        if not np.all(np.isfinite(v)):
            raise ValueError("field has non-finite entries")
        object.__setattr__(self, "values", v)

    def chart_values(self) -> np.ndarray:
        return self.values[self.surface.chart_node]


def _values(S: SampledSurface, f) -> np.ndarray:
    if isinstance(f, ScalarField):
        if f.surface is not S:
            raise ValueError("field lives on a different surface")
        return f.values
    v = np.asarray(f)
    if v.shape != (S.n,):
        raise ValueError(f"field has shape {v.shape}, surface has {S.n} nodes")
    return v


def laplace_beltrami(S: SampledSurface, f) -> ScalarField:
    """Discrete Laplace-Beltrami ``-mass^-1 K f`` (negative at the peak of a bump)."""
    v = _values(S, f)
    return ScalarField(-(S.stiffness @ v) / S.mass, S)


def integrate(S: SampledSurface, f) -> float | complex:
    """Compensated sum of mass-weighted values."""
    v = _values(S, f) * S.mass
    if np.iscomplexobj(v):
        return complex(math.fsum(v.real), math.fsum(v.imag))
    return math.fsum(v)


def laplacian_eigenvalues(S: SampledSurface, k: int = 4, dense: bool = False) -> np.ndarray:
    """Smallest eigenvalues of -Delta, i.e. of K f = lam M f."""
    if dense:
        from scipy.linalg import eigh

        vals = eigh(S.stiffness.toarray(), np.diag(S.mass), eigvals_only=True)
        return vals[:k]
    from scipy.sparse.linalg import eigsh

    v0 = np.random.default_rng(0).uniform(0.5, 1.5, S.n)  # fixed start vector keeps reruns identical
    vals = eigsh(S.stiffness, k=k, M=sp.diags(S.mass), sigma=-1.0, which="LM", v0=v0, return_eigenvectors=False)
    return np.sort(vals)


def export_surface_csv(S: SampledSurface, path: str | Path) -> Path:
    rows = ((i, z.real, z.imag, m) for i, (z, m) in enumerate(zip(S.points, S.mass)))
    return write_csv(path, ["idx", "re_z", "im_z", "mass"], rows)


def export_operator(S: SampledSurface, path: str | Path) -> Path:
    K = S.stiffness.tocoo()
    order = np.lexsort((K.col, K.row))
    rows = ((int(K.row[i]), int(K.col[i]), float(K.data[i])) for i in order)
    return write_csv(path, ["row", "col", "value"], rows)
