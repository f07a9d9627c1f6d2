"""Figures written next to the CSV output of each command."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import matplotlib.tri as mtri  # noqa: E402
import numpy as np  # noqa: E402

plt.rcParams.update({
    "figure.dpi": 110,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "savefig.bbox": "tight",
})


def _save(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path)
    plt.close(fig)
    return path


def _disk_axes(ax, S):
    ax.add_patch(plt.Circle((0, 0), 1, fill=False, lw=0.6, color="0.5"))
    v = np.append(S.polygon.vertices, S.polygon.vertices[:1])
    ax.plot(v.real, v.imag, lw=0.6, color="k")
    ax.set_aspect("equal")
    ax.set_xlim(-1.02, 1.02)
    ax.set_ylim(-1.02, 1.02)
    ax.grid(False)


def _chart_tri(S):
    return mtri.Triangulation(S.chart_points.real, S.chart_points.imag, S.triangles)


def plot_surface(S, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.triplot(_chart_tri(S), lw=0.2, color="C0")
    _disk_axes(ax, S)
    ax.set_title(f"fundamental domain, resolution {S.resolution}, genus {S.genus}")
    return _save(fig, path)


def plot_field(S, chart_values, path: Path, title: str, cmap: str = "viridis") -> Path:
    fig, ax = plt.subplots(figsize=(5.4, 5))
    tpc = ax.tripcolor(_chart_tri(S), np.asarray(chart_values, dtype=float), shading="gouraud", cmap=cmap)
    fig.colorbar(tpc, ax=ax, shrink=0.8)
    _disk_axes(ax, S)
    ax.set_title(title)
    return _save(fig, path)


def plot_gauss(S, data, out: Path, stem: str) -> list[Path]:
    u = data.u.chart_values()
    lam = data.lam.chart_values()
    return [
        plot_field(S, u, out / f"{stem}_u.png", f"u, t = {data.t:.3g}", "magma"),
        plot_field(S, lam, out / f"{stem}_lambda.png", f"principal curvature, t = {data.t:.3g}"),
    ]


def plot_foliation(rows, path: Path) -> Path:
    r = np.array([row[0] for row in rows])
    cols = np.array([row[1:] for row in rows], dtype=float)
    fig, ax = plt.subplots(figsize=(6, 3.6))
    for k, name in enumerate(["max lambda1", "max lambda2", "max |mu|", "dT bound"]):
        ax.plot(r, cols[:, k], "--" if k == 3 else "-", marker="o", ms=3, label=name)
    ax.set_xlabel("r")
    ax.legend(frameon=False)
    ax.set_title("equidistant leaves")
    return _save(fig, path)


def plot_bounds(lambda0_values, path: Path) -> Path:
    from .foliation import teich_bound

    r = np.linspace(-6, 6, 241)
    fig, ax = plt.subplots(figsize=(6, 3.6))
    for lam in lambda0_values:
        if lam == 0:
            continue
        ax.plot(r, [teich_bound(lam, 0.0, x) for x in r], label=f"lambda0 = {lam:g}")
        ax.axhline(teich_bound(lam, 0.0, np.inf), ls=":", lw=0.8, color="0.4")
    ax.set_xlabel("r")
    ax.set_ylabel("bound from the minimal leaf")
    ax.legend(frameon=False)
    return _save(fig, path)


def plot_wp(reports, first_variation, slope, path: Path) -> Path:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4), gridspec_kw={"width_ratios": [3, 2]})
    pairs = list(dict.fromkeys((r.alpha_id, r.beta_id) for r in reports))
    steps = sorted({r.step for r in reports}, reverse=True)
    width = 0.8 / len(steps)
    for k, h in enumerate(steps):
        err = {(r.alpha_id, r.beta_id): r.rel_error for r in reports if r.step == h}
        x = [i + (k - (len(steps) - 1) / 2) * width for i in range(len(pairs))]
        ax1.bar(x, [err.get(pr, np.nan) for pr in pairs], width, label=f"h = {h:g}")
    ax1.set_xticks(range(len(pairs)))
    ax1.set_xticklabels([f"{a}\n{b}" for a, b in pairs], fontsize=7)
    ax1.set_yscale("log")
    ax1.set_ylabel("relative error")
    ax1.legend(frameon=False, fontsize=8)
    t = np.array([p[0] for p in first_variation], dtype=float)
    d = np.array([p[1] for p in first_variation])
    ax2.loglog(t, d, "o-", label=f"slope {slope:.3f}")
    ax2.set_xlabel("|t|")
    ax2.set_ylabel("|area(t) - area(0)|")
    ax2.legend(frameon=False)
    fig.tight_layout()
    return _save(fig, path)


def plot_epstein(points, factors, path: Path) -> Path:
    fig = plt.figure(figsize=(5, 5))
    ax = fig.add_subplot(projection="3d")
    sc = ax.scatter(points[:, 0], points[:, 1], points[:, 2], c=np.log(factors), s=8)
    fig.colorbar(sc, ax=ax, shrink=0.6, label="log boundary factor")
    ax.set_box_aspect((1, 1, 1))
    ax.set_title("Epstein surface samples")
    return _save(fig, path)
