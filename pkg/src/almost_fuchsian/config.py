"""Run configuration: INI sections with typed, range-checked keys.  Unknown keys are errors."""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .foliation import DEFAULT_R_GRID


class ConfigError(ValueError):
    pass


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.replace(";", ",").split(",") if x.strip())


def _complexes(text: str) -> tuple[complex, ...]:
    return tuple(complex(x.replace(" ", "")) for x in text.split(",") if x.strip())


def _endpoint(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "+inf"):
        return math.inf
    if t == "-inf":
        return -math.inf
    return float(t)


def _intervals(text: str) -> tuple[tuple[float, float], ...]:
    out = []
    for item in text.split(","):
        if not item.strip():
            continue
        lo, hi = item.split(":")
        out.append((_endpoint(lo), _endpoint(hi)))
    return tuple(out)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _basis(text: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in text.split(";") if p.strip())


@dataclass(frozen=True)
class RunConfig:
    # [surface]
    group: str = "bolza"
    resolution: int = 64
    word_length: int = 6
    # [differentials]
    basis: tuple[str, ...] = ("1", "1 + z^2", "1 + z^4")
    sample_size: int = 200
    residual_lengths: tuple[int, ...] = (4, 8)
    # [gauss]
    t: tuple[complex, ...] = (0j,)
    differential: int = 0
    tol: float = 1e-10
    max_iter: int = 50
    t_max: float = 0.5
    cg_tol: float = 1e-12
    # [foliation]
    foliation_t: complex = 0.5 + 0j
    r_grid: tuple[float, ...] = DEFAULT_R_GRID
    # [bounds]
    lambda0: tuple[float, ...] = (0.0, 0.1, 0.5, 0.9)
    intervals: tuple[tuple[float, float], ...] = (
        (0.0, 1.0), (0.0, 8.0), (0.0, 20.0), (0.0, math.inf),
        (-20.0, 20.0), (-math.inf, 0.0), (-math.inf, math.inf),
    )
    # [wp]
    h: float = 0.05
    threshold: float = 0.05
    first_variation_t: tuple[float, ...] = (0.02, 0.04, 0.08)
    wp_tol: float = 1e-11
    refine: bool = True
    # [epstein]
    rho: str = "harmonic 1 0.3 0.6 0 0.8"
    theta_radii: tuple[float, ...] = (0.0, 0.25, 0.5, 1.0, 2.0, 4.0)
    theta_angles: int = 8
    flow_shifts: tuple[float, ...] = (0.1, 0.5, 1.0)
    # [run]
    seed: int = 0
    out: str = "results"
    figures: bool = True
    source: str = field(default="", compare=False)


# section -> key -> (field name, parser)
_SCHEMA = {
    "surface": {
        "group": ("group", str.strip),
        "resolution": ("resolution", int),
        "word_length": ("word_length", int),
    },
    "differentials": {
        "basis": ("basis", _basis),
        "sample_size": ("sample_size", int),
        "residual_lengths": ("residual_lengths", lambda s: tuple(int(x) for x in s.split(",") if x.strip())),
    },
    "gauss": {
        "t": ("t", _complexes),
        "differential": ("differential", int),
        "tol": ("tol", float),
        "max_iter": ("max_iter", int),
        "t_max": ("t_max", float),
        "cg_tol": ("cg_tol", float),
    },
    "foliation": {
        "t": ("foliation_t", lambda s: complex(s.replace(" ", ""))),
        "r_grid": ("r_grid", _floats),
    },
    "bounds": {
        "lambda0": ("lambda0", _floats),
        "intervals": ("intervals", _intervals),
    },
    "wp": {
        "h": ("h", float),
        "threshold": ("threshold", float),
        "first_variation_t": ("first_variation_t", _floats),
        "tol": ("wp_tol", float),
        "refine": ("refine", _bool),
    },
    "epstein": {
        "rho": ("rho", str.strip),
        "theta_radii": ("theta_radii", _floats),
        "theta_angles": ("theta_angles", int),
        "flow_shifts": ("flow_shifts", _floats),
    },
    "run": {
        "seed": ("seed", int),
        "out": ("out", str.strip),
        "figures": ("figures", _bool),
    },
}


def _validate(cfg: RunConfig) -> None:
    checks = [
        (cfg.resolution >= 8, "surface.resolution must be >= 8"),
        (2 <= cfg.word_length <= 10, "surface.word_length must lie in [2, 10]"),
        (len(cfg.basis) >= 1, "differentials.basis must list at least one polynomial"),
        (cfg.sample_size >= 1, "differentials.sample_size must be positive"),
        (all(2 <= L <= 10 for L in cfg.residual_lengths), "differentials.residual_lengths must lie in [2, 10]"),
        (0 <= cfg.differential < len(cfg.basis), "gauss.differential must index the basis"),
        (len(cfg.t) >= 1, "gauss.t must list at least one value"),
        (cfg.tol > 0 and cfg.cg_tol > 0, "gauss tolerances must be positive"),
        (cfg.max_iter >= 1, "gauss.max_iter must be positive"),
        (cfg.t_max > 0, "gauss.t_max must be positive"),
        (len(cfg.r_grid) >= 1 and all(math.isfinite(r) for r in cfg.r_grid), "foliation.r_grid must be finite reals"),
        (all(0 <= x < 1 for x in cfg.lambda0), "bounds.lambda0 must lie in [0, 1)"),
        (all(lo <= hi and lo != math.inf and hi != -math.inf for lo, hi in cfg.intervals),
         "bounds.intervals must be ordered pairs lo:hi"),
        (cfg.h > 0, "wp.h must be positive"),
        (cfg.threshold > 0, "wp.threshold must be positive"),
        (len(cfg.first_variation_t) >= 2 and all(t > 0 for t in cfg.first_variation_t),
         "wp.first_variation_t needs at least two positive values"),
        (cfg.wp_tol > 0, "wp.tol must be positive"),
        (cfg.theta_angles >= 1, "epstein.theta_angles must be positive"),
        (all(r >= 0 for r in cfg.theta_radii), "epstein.theta_radii must be non-negative"),
        (all(math.isfinite(s) for s in cfg.flow_shifts), "epstein.flow_shifts must be finite"),
        (cfg.seed >= 0, "run.seed must be non-negative"),
    ]
    for ok, msg in checks:
        if not ok:
            raise ConfigError(msg)


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    values = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"{source}: unknown section [{section}]")
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"{source}: unknown key '{key}' in [{section}]")
            name, conv = _SCHEMA[section][key]
            try:
                values[name] = conv(raw)
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"{source}: bad value for '{section}.{key}': {raw!r}") from exc
    cfg = replace(RunConfig(), source=source, **values)
    _validate(cfg)
    return cfg


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, str(path))


def with_overrides(cfg: RunConfig, out: str | None = None, seed: int | None = None) -> RunConfig:
    changes = {}
    if out is not None:
        changes["out"] = out
    if seed is not None:
        changes["seed"] = seed
    cfg = replace(cfg, **changes)
    _validate(cfg)
    return cfg
