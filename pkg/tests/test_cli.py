import csv
import math

import pytest

from almost_fuchsian.cli import build_parser, main
from almost_fuchsian.foliation import teich_bound
from almost_fuchsian.moebius import MobiusTransform, bolza_group, write_group

SMALL = """\
[surface]
resolution = 16
word_length = 4

[differentials]
sample_size = 40
residual_lengths = 3, 4

[gauss]
t = 0, 0.5

[run]
out = out
"""

COMMANDS = ["surface-check", "gauss-solve", "foliate", "bounds", "wp-verify", "epstein"]


def _config(tmp_path, text=SMALL, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture(scope="module")
def small_runs(tmp_path_factory):
    base = tmp_path_factory.mktemp("cli")
    cfg = _config(base)
    outs = {}
    for tag in ("a", "b"):
        for cmd in COMMANDS:
            assert main([cmd, "--config", str(cfg), "--out", str(base / tag), "--no-figures"]) == 0, cmd
        outs[tag] = base / tag
    return outs


def test_parser_lists_commands():
    text = build_parser().format_help()
    for cmd in COMMANDS:
        assert cmd in text


def test_unknown_command_is_config_error():
    assert main(["nonsense"]) == 1


def test_rerun_is_byte_identical(small_runs):
    files = sorted(p.name for p in small_runs["a"].iterdir())
    assert files == sorted(p.name for p in small_runs["b"].iterdir())
    assert len(files) >= 13
    for name in files:
        assert (small_runs["a"] / name).read_bytes() == (small_runs["b"] / name).read_bytes(), name


def test_csv_format(small_runs):
    for p in small_runs["a"].glob("*.csv"):
        data = p.read_bytes()
        assert b"\r" not in data and data.endswith(b"\n")
        header = data.split(b"\n", 1)[0].decode()
        assert header and "," in header


def test_no_figures_flag(small_runs):
    assert not list(small_runs["a"].glob("*.png"))


def test_surface_check_report(small_runs):
    rows = {r["check"]: r for r in _rows(small_runs["a"] / "surface_check.csv")}
    assert all(r["pass"] == "true" for r in rows.values())
    assert abs(float(rows["area"]["value"]) - 4 * math.pi) < 0.01 * 4 * math.pi
    nodes = _rows(small_runs["a"] / "surface_nodes.csv")
    assert list(nodes[0]) == ["idx", "re_z", "im_z", "mass"]


def test_gauss_solve_report(small_runs):
    rows = _rows(small_runs["a"] / "gauss_solve.csv")
    assert [float(r["t_re"]) for r in rows] == [0.0, 0.5]
    assert float(rows[0]["max_lambda"]) == 0
    assert 0 < float(rows[1]["max_lambda"]) < 1


def test_foliate_report(small_runs):
    rows = _rows(small_runs["a"] / "foliate.csv")
    rs = [float(r["r"]) for r in rows]
    assert rs == sorted(rs)
    bounds = [float(r["dT_bound_from_minimal"]) for r in rows]
    # bounds grow with |r| on each side of the minimal leaf
    pos = [b for r, b in zip(rs, bounds) if r >= 0]
    neg = [b for r, b in zip(rs, bounds) if r <= 0][::-1]
    assert pos == sorted(pos) and neg == sorted(neg)
    far = rows[-1]
    lam0 = None
    for r in rows:
        if float(r["r"]) == 0:
            lam0 = float(r["max_lambda2"])
    assert abs(float(far["dT_bound_from_minimal"]) - teich_bound(lam0, 0.0, math.inf)) < 1e-6
    assert abs(float(rows[0]["dT_bound_from_minimal"]) - teich_bound(lam0, -math.inf, 0.0)) < 1e-6


def test_foliate_at_fuchsian_point_is_zero(tmp_path):
    cfg = _config(tmp_path, SMALL + "\n[foliation]\nt = 0\n")
    assert main(["foliate", "--config", str(cfg), "--out", str(tmp_path / "o"), "--no-figures"]) == 0
    for r in _rows(tmp_path / "o" / "foliate.csv"):
        assert float(r["max_abs_mu"]) == 0 and float(r["dT_bound_from_minimal"]) == 0


def test_bounds_report(small_runs):
    rows = _rows(small_runs["a"] / "bounds.csv")
    assert rows
    for r in rows:
        lam = float(r[list(r)[0]])
        if lam == 0:
            assert float(r[list(r)[-1]]) == 0


def test_wp_report(small_runs):
    rows = _rows(small_runs["a"] / "wp_verify.csv")
    assert all(float(r["rel_error"]) <= 0.05 for r in rows)
    self_pair = next(r for r in rows if r["alpha_id"] == "1" and r["beta_id"] == "1")
    assert float(self_pair["fd_re"]) < 0
    summary = {r["check"]: r for r in _rows(small_runs["a"] / "wp_summary.csv")}
    assert all(r["pass"] == "true" for r in summary.values())


def test_epstein_report(small_runs):
    checks = {r["check"]: r for r in _rows(small_runs["a"] / "epstein_checks.csv")}
    assert all(r["pass"] == "true" for r in checks.values())
    assert float(checks["constant_rho_radius_error"]["value"]) <= 1e-12
    flow = _rows(small_runs["a"] / "epstein_flow.csv")
    assert max(float(r["error"]) for r in flow) < 1e-6


def test_figures_written(tmp_path):
    cfg = _config(tmp_path)
    out = tmp_path / "fig"
    for cmd in ("bounds", "epstein", "foliate"):
        assert main([cmd, "--config", str(cfg), "--out", str(out)]) == 0
    pngs = {p.name for p in out.glob("*.png")}
    assert len(pngs) >= 3
    for p in out.glob("*.png"):
        assert p.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_malformed_key_names_the_key(tmp_path, capsys):
    cfg = _config(tmp_path, SMALL + "\n[wp]\nstep_size = 0.1\n")
    assert main(["bounds", "--config", str(cfg), "--no-figures"]) == 1
    assert "step_size" in capsys.readouterr().err


def test_bad_value_is_config_error(tmp_path, capsys):
    cfg = _config(tmp_path, SMALL.replace("resolution = 16", "resolution = sixteen"))
    assert main(["surface-check", "--config", str(cfg), "--no-figures"]) == 1
    assert "resolution" in capsys.readouterr().err


def test_missing_config_is_config_error(tmp_path):
    assert main(["bounds", "--config", str(tmp_path / "absent.ini")]) == 1


def test_corrupted_group_file(tmp_path):
    G = bolza_group()
    gens = list(G.generators)
    gens[0] = MobiusTransform(gens[0].a + 1e-3, gens[0].b)
    write_group(type(G)(tuple(gens), G.relation, "corrupted"), tmp_path / "bad.txt")
    cfg = _config(tmp_path, SMALL.replace("[surface]", "[surface]\ngroup = bad.txt"))
    assert main(["surface-check", "--config", str(cfg), "--out", str(tmp_path / "o"), "--no-figures"]) == 2
    rows = {r["check"]: r for r in _rows(tmp_path / "o" / "surface_check.csv")}
    assert rows["relation_residual"]["pass"] == "false"


def test_group_file_round_trip_runs(tmp_path):
    write_group(bolza_group(), tmp_path / "bolza.txt")
    cfg = _config(tmp_path, SMALL.replace("[surface]", "[surface]\ngroup = bolza.txt"))
    assert main(["gauss-solve", "--config", str(cfg), "--out", str(tmp_path / "o"), "--no-figures"]) == 0


def test_bad_support_function(tmp_path, capsys):
    cfg = _config(tmp_path, SMALL + "\n[epstein]\nrho = spline 1 2\n")
    assert main(["epstein", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    assert "rho" in capsys.readouterr().err


def test_huge_t_is_solver_failure(tmp_path):
    cfg = _config(tmp_path, SMALL.replace("t = 0, 0.5", "t = 40"))
    assert main(["gauss-solve", "--config", str(cfg), "--out", str(tmp_path / "o"), "--no-figures"]) == 3


def test_seed_override_changes_random_samples(tmp_path):
    cfg = _config(tmp_path)
    main(["epstein", "--config", str(cfg), "--out", str(tmp_path / "s1"), "--seed", "1", "--no-figures"])
    main(["epstein", "--config", str(cfg), "--out", str(tmp_path / "s2"), "--seed", "2", "--no-figures"])
    assert (tmp_path / "s1" / "epstein.csv").read_bytes() != (tmp_path / "s2" / "epstein.csv").read_bytes()


def test_shipped_configs_parse():
    from pathlib import Path

    from almost_fuchsian.config import RunConfig, load_config

    root = Path(__file__).resolve().parents[1] / "configs"
    assert load_config(root / "default.ini") == RunConfig()
    quick = load_config(root / "quick.ini")
    assert quick.resolution == 16 and quick.t == (0j, 0.25 + 0j, 0.5 + 0j)
