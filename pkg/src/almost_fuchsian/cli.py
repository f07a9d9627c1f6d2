"""Command line front end.

Exit codes: 0 all checks pass, 1 configuration or I/O error, 2 invariant
failure, 3 solver non-convergence.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import epstein as ep
from ._csvio import write_csv
from .config import ConfigError, RunConfig, load_config, with_overrides
from .foliation import BOUNDS_HEADER, FOLIATE_HEADER, foliate_rows, teich_bound
from .gauss import (
    NonConvergence,
    curvature_consistency,
    log_conformal_factor,
    second_fundamental_form_components,
    solve_gauss,
    write_solve_report,
)
from .moebius import FuchsianGroup, bolza_group, enumerate_group, load_group
from .poincare import (
    parse_polynomial,
    poincare_basis,
    sample_automorphy_residuals,
    sample_fundamental_domain,
    wp_gram,
)
from .surface import build_sampled_surface, conformal_factor, export_surface_csv, laplacian_eigenvalues
from .wp import first_variation_check, loglog_slope, second_variation_fd, write_wp_report

EXIT_OK, EXIT_CONFIG, EXIT_INVARIANT, EXIT_SOLVER = 0, 1, 2, 3
GROUP_TOL = 1e-8
CHECK_HEADER = ["check", "value", "threshold", "pass"]


class InvariantFailure(RuntimeError):
    pass


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


# ---------------------------------------------------------------- shared setup


def resolve_group(cfg: RunConfig) -> FuchsianGroup:
    if cfg.group.lower() == "bolza":
        return bolza_group()
    path = Path(cfg.group)
    if not path.is_absolute() and not path.exists() and cfg.source:
        path = Path(cfg.source).parent / path
    try:
        return load_group(path)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot load group file {cfg.group}: {exc}") from exc


def group_checks(G: FuchsianGroup) -> list[list]:
    rel, det = G.relation_residual(), G.determinant_residual()
    return [
        ["relation_residual", rel, GROUP_TOL, rel <= GROUP_TOL],
        ["determinant_residual", det, GROUP_TOL, det <= GROUP_TOL],
    ]


def _checked_group(cfg: RunConfig) -> FuchsianGroup:
    G = resolve_group(cfg)
    bad = [row for row in group_checks(G) if not row[3]]
    if bad:
        raise InvariantFailure(", ".join(f"{r[0]} = {r[1]:.3e} > {r[2]:g}" for r in bad))
    return G


def _polys(cfg: RunConfig):
    try:
        return [parse_polynomial(p) for p in cfg.basis]
    except ValueError as exc:
        raise ConfigError(f"differentials.basis: {exc}") from exc


def _setup(cfg: RunConfig):
    G = _checked_group(cfg)
    polys = _polys(cfg)
    S = build_sampled_surface(G, cfg.resolution)
    basis = poincare_basis(polys, G, cfg.word_length, S)
    return G, S, basis


def _solver_opts(cfg: RunConfig) -> dict:
    return dict(max_iter=cfg.max_iter, t_max=cfg.t_max, cg_tol=cfg.cg_tol)


# ---------------------------------------------------------------- commands


def cmd_surface_check(cfg: RunConfig, out: Path, figures: bool) -> int:
    G = resolve_group(cfg)
    rows = group_checks(G)
    if not all(r[3] for r in rows):
        write_csv(out / "surface_check.csv", CHECK_HEADER, rows)
        failed = [r[0] for r in rows if not r[3]]
        raise InvariantFailure(f"group invariants failed: {', '.join(failed)}")
    polys = _polys(cfg)
    S = build_sampled_surface(G, cfg.resolution)
    area = S.total_mass
    expected = 4 * math.pi * (S.genus - 1)
    K = S.stiffness
    row_sum = float(np.max(np.abs(np.asarray(K.sum(axis=1)).ravel())))
    asym = float(abs(K - K.T).max()) if K.nnz else 0.0
    eig = laplacian_eigenvalues(S, k=2)
    rows += [
        ["genus", S.genus, 2, S.genus >= 2],
        ["area", area, "", True],
        ["area_rel_error", abs(area - expected) / expected, 0.01, abs(area - expected) / expected <= 0.01],
        ["seam_residual", S.seam_residual(), 1e-9, S.seam_residual() <= 1e-9],
        ["stiffness_row_sum", row_sum, 1e-10, row_sum <= 1e-10],
        ["stiffness_asymmetry", asym, 1e-12, asym <= 1e-12],
        ["laplacian_eig0", abs(eig[0]), 1e-8, abs(eig[0]) <= 1e-8],
        ["laplacian_eig1", eig[1], 0.0, eig[1] > 0],
    ]
    lengths = sorted(set(cfg.residual_lengths) | {cfg.word_length})
    elements = enumerate_group(G, max(lengths))
    basis = poincare_basis(polys, G, cfg.word_length, S, elements)
    for f in basis:
        rows.append([f"seam_automorphy[{f.label}]", f.residual, "", True])
    samples = sample_fundamental_domain(G, cfg.sample_size, cfg.seed)
    residuals = {L: sample_automorphy_residuals(polys, elements.truncate(L), G, samples) for L in lengths}
    for L in lengths:
        for f, res in zip(basis, residuals[L]):
            rows.append([f"sample_automorphy[{f.label}]@L{L}", float(res), "", True])
    ladder = sorted(set(cfg.residual_lengths))
    if len(ladder) >= 2:
        lo, hi = ladder[0], ladder[-1]
        for f, r_lo, r_hi in zip(basis, residuals[lo], residuals[hi]):
            ratio = float(r_hi / r_lo) if r_lo > 0 else 0.0
            rows.append([f"residual_ratio[{f.label}]@L{hi}/L{lo}", ratio, 0.5, ratio <= 0.5])
    gram = wp_gram(S, basis)
    herm = float(np.max(np.abs(gram - gram.conj().T)))
    min_eig = float(np.min(np.linalg.eigvalsh(0.5 * (gram + gram.conj().T))))
    rows += [
        ["gram_hermitian", herm, 1e-14, herm <= 1e-14],
        ["gram_min_eigenvalue", min_eig, 0.0, min_eig > 0],
    ]
    write_csv(out / "surface_check.csv", CHECK_HEADER, rows)
    export_surface_csv(S, out / "surface_nodes.csv")
    if figures:
        from . import report

        report.plot_surface(S, out / "surface_mesh.png")
        for k, f in enumerate(basis):
            ratio = np.abs(f.chart_values) / conformal_factor(S.chart_points)
            report.plot_field(S, ratio, out / f"differential_{k}.png", f"|alpha| / g0 for P = {f.label}")
    failed = [r[0] for r in rows if not r[3]]
    if failed:
        raise InvariantFailure(f"surface checks failed: {', '.join(failed)}")
    return EXIT_OK


def cmd_gauss_solve(cfg: RunConfig, out: Path, figures: bool) -> int:
    G, S, basis = _setup(cfg)
    alpha = basis[cfg.differential]
    runs, area_rows, field_rows = [], [], []
    for k, t in enumerate(cfg.t):
        data = solve_gauss(S, alpha, t, tol=cfg.tol, **_solver_opts(cfg))
        runs.append(data)
        area = math.fsum(S.mass * np.exp(2 * data.u.values))
        area_rows.append([t.real, t.imag, area, 4 * math.pi * (S.genus - 1) - area, curvature_consistency(S, data)])
        a, b = second_fundamental_form_components(S, data)
        for i in range(S.n):
            field_rows.append([k, i, S.points[i].real, S.points[i].imag, data.u.values[i],
                               data.lam.values[i], a.values[i], b.values[i]])
    write_solve_report(out / "gauss_solve.csv", runs)
    write_csv(out / "gauss_area.csv", ["t_re", "t_im", "area", "area_deficit", "curvature_consistency"], area_rows)
    write_csv(out / "gauss_fields.csv", ["run", "idx", "re_z", "im_z", "u", "lambda", "a", "b"], field_rows)
    if figures:
        from . import report

        for k, data in enumerate(runs):
            report.plot_gauss(S, data, out, f"gauss_{k}")
    bad = [d for d in runs if d.u.values.max() > 1e-8 or not d.residual_norm < cfg.tol]
    if bad:
        raise InvariantFailure(f"solution invariants failed at t = {[str(d.t) for d in bad]}")
    return EXIT_OK


def cmd_foliate(cfg: RunConfig, out: Path, figures: bool) -> int:
    G, S, basis = _setup(cfg)
    data = solve_gauss(S, basis[cfg.differential], cfg.foliation_t, tol=cfg.tol, **_solver_opts(cfg))
    a, b = second_fundamental_form_components(S, data)
    v = log_conformal_factor(S, data)
    rows = foliate_rows(v.values, a.values, b.values, cfg.r_grid)
    write_csv(out / "foliate.csv", FOLIATE_HEADER, rows)
    if figures:
        from . import report

        report.plot_foliation(rows, out / "foliate.png")
    if not data.almost_fuchsian:
        raise InvariantFailure("minimal surface is not almost Fuchsian (max lambda >= 1)")
    if any(not row[3] < 1 for row in rows):
        raise InvariantFailure("a leaf has |mu| >= 1")
    return EXIT_OK


def cmd_bounds(cfg: RunConfig, out: Path, figures: bool) -> int:
    rows = []
    for lam in cfg.lambda0:
        for lo, hi in cfg.intervals:
            rows.append([lam, lo, hi, teich_bound(lam, lo, hi)])
    write_csv(out / "bounds.csv", BOUNDS_HEADER, rows)
    if figures:
        from . import report

        report.plot_bounds(cfg.lambda0, out / "bounds.png")
    for lam in cfg.lambda0:
        full = teich_bound(lam, -math.inf, math.inf)
        if full != 2 * teich_bound(lam, 0.0, math.inf):
            raise InvariantFailure(f"two-sided bound is not twice the one-sided bound at lambda0 = {lam}")
    return EXIT_OK


def cmd_wp_verify(cfg: RunConfig, out: Path, figures: bool) -> int:
    G, S, basis = _setup(cfg)
    steps = [cfg.h, cfg.h / 2] if cfg.refine else [cfg.h]
    reports = []
    for h in steps:
        for i, fa in enumerate(basis):
            for j, fb in enumerate(basis):
                reports.append(second_variation_fd(S, fa, fb, h, tol=cfg.wp_tol, max_iter=cfg.max_iter,
                                                   t_max=cfg.t_max))
    write_wp_report(out / "wp_verify.csv", reports)
    alpha = basis[cfg.differential]
    fv = first_variation_check(S, alpha, cfg.first_variation_t, tol=cfg.wp_tol, **_solver_opts(cfg))
    slope = loglog_slope(fv)
    base = S.total_mass
    write_csv(out / "wp_first_variation.csv", ["t", "area", "abs_deviation"],
              [[t, base - d, d] for t, d in fv])
    main = [r for r in reports if r.step == cfg.h]
    worst = max(r.rel_error for r in main)
    diag = [r for r in main if r.alpha_id == r.beta_id]
    diag_neg = all(r.fd_value.real < 0 for r in diag)
    diag_imag = max(abs(r.fd_value.imag) / abs(r.fd_value.real) for r in diag)
    rows = [
        ["max_rel_error", worst, cfg.threshold, worst <= cfg.threshold],
        ["self_pair_negative_real", int(diag_neg), 1, diag_neg],
        ["self_pair_imag_ratio", diag_imag, 0.05, diag_imag < 0.05],
        ["first_variation_slope", slope, "1.8..2.2", 1.8 <= slope <= 2.2],
    ]
    if cfg.refine:
        refined = [r for r in reports if r.step != cfg.h]
        ratios = [a.rel_error / b.rel_error for a, b in zip(main, refined) if b.rel_error > 0]
        rows.append(["h_refinement_ratio_min", min(ratios), "2.5..6", True])
        rows.append(["h_refinement_ratio_max", max(ratios), "2.5..6", True])
    write_csv(out / "wp_summary.csv", CHECK_HEADER, rows)
    if figures:
        from . import report

        report.plot_wp(reports, fv, slope, out / "wp_verify.png")
    failed = [r[0] for r in rows if not r[3]]
    if failed:
        raise InvariantFailure(f"second-variation checks failed: {', '.join(failed)}")
    return EXIT_OK


def epstein_samples(cfg: RunConfig) -> np.ndarray:
    pts = []
    for r in cfg.theta_radii:
        if r == 0:
            pts.append(0j)
            continue
        for k in range(cfg.theta_angles):
            pts.append(r * np.exp(2j * np.pi * (k + 0.5) / cfg.theta_angles))
    rng = np.random.default_rng(cfg.seed)
    pts.extend(rng.normal(size=8) + 1j * rng.normal(size=8))
    return np.array(pts)


def cmd_epstein(cfg: RunConfig, out: Path, figures: bool) -> int:
    try:
        rho = ep.parse_support(cfg.rho)
    except ValueError as exc:
        raise ConfigError(f"epstein.rho: {exc}") from exc
    theta = epstein_samples(cfg)
    with np.errstate(all="ignore"):
        p = ep.epstein_embed(rho, theta)
        factor = ep.boundary_conformal_factor(rho, theta)
    ok = np.all(np.isfinite(p), axis=-1) & np.isfinite(factor)
    rows = [[t.real, t.imag, *pt, f] for t, pt, f in zip(theta[ok], p[ok], factor[ok])]
    write_csv(out / "epstein.csv", ep.EPSTEIN_HEADER, rows)
    dist = ep.normal_flow_distances(rho, theta[ok], cfg.flow_shifts)
    flow_rows = []
    for k, r in enumerate(cfg.flow_shifts):
        for t, d in zip(theta[ok], dist[k]):
            flow_rows.append([t.real, t.imag, r, d, abs(d - abs(r))])
    write_csv(out / "epstein_flow.csv", ep.FLOW_HEADER, flow_rows)
    # fixed regression: rho = 1 is the sphere of radius 1 about the origin
    const = ep.constant_support(1.0)
    cp = ep.epstein_embed(const, theta[ok])
    const_err = float(np.max(np.abs(np.linalg.norm(cp, axis=-1) - math.tanh(0.5))))
    f0 = float(ep.boundary_conformal_factor(const, np.array([0j]))[0])
    flow_err = float(np.max([row[4] for row in flow_rows])) if flow_rows else 0.0
    inside = float(np.max(np.linalg.norm(p[ok], axis=-1))) if ok.any() else 0.0
    grng = np.random.default_rng(cfg.seed + 1)
    pull_err = 0.0
    for _ in range(8):
        gamma = ep.random_mobius(grng, 0.5)
        with np.errstate(all="ignore"):
            pull_err = max(pull_err, ep.pullback_identity_residual(rho, gamma, theta[ok]))
    checks = [
        ["constant_rho_radius_error", const_err, 1e-12, const_err <= 1e-12],
        ["constant_rho_factor_at_origin", f0, 4 * math.e**2, abs(f0 - 4 * math.e**2) <= 1e-12 * f0],
        ["max_point_norm", inside, 1.0, inside < 1],
        ["normal_flow_max_error", flow_err, 1e-6, flow_err <= 1e-6],
        ["pullback_identity", pull_err, 1e-12, pull_err <= 1e-12],
        ["identity_equivariance", ep.equivariance_residual(rho, np.eye(2), theta[ok]), 0.0,
         ep.equivariance_residual(rho, np.eye(2), theta[ok]) == 0.0],
        ["skipped_points", int((~ok).sum()), "", True],
    ]
    write_csv(out / "epstein_checks.csv", CHECK_HEADER, checks)
    if figures and ok.any():
        from . import report

        report.plot_epstein(p[ok], factor[ok], out / "epstein.png")
    failed = [r[0] for r in checks if not r[3]]
    if failed:
        raise InvariantFailure(f"Epstein checks failed: {', '.join(failed)}")
    return EXIT_OK


COMMANDS = {
    "surface-check": cmd_surface_check,
    "foliate": cmd_foliate,
    "bounds": cmd_bounds,
    "gauss-solve": cmd_gauss_solve,
    "wp-verify": cmd_wp_verify,
    "epstein": cmd_epstein,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="INI run configuration")
    common.add_argument("--out", metavar="DIR", help="output directory (overrides [run] out)")
    common.add_argument("--seed", metavar="N", type=int, help="random seed (overrides [run] seed)")
    common.add_argument("--no-figures", action="store_true", help="write CSV only")
    parser = argparse.ArgumentParser(
        prog="almost-fuchsian",
        description="Minimal surfaces, equidistant foliations and area variations over closed hyperbolic surfaces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=(fn.__doc__ or name.replace("-", " ")))
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = with_overrides(load_config(args.config), args.out, args.seed)
        out = Path(cfg.out)
        return COMMANDS[args.command](cfg, out, cfg.figures and not args.no_figures)
    except ConfigError as exc:
        _log(f"config error: {exc}")
        return EXIT_CONFIG
    except OSError as exc:
        _log(f"I/O error: {exc}")
        return EXIT_CONFIG
    except InvariantFailure as exc:
        _log(f"invariant failure: {exc}")
        return EXIT_INVARIANT
    except NonConvergence as exc:
        _log(f"solver did not converge: {exc}")
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
