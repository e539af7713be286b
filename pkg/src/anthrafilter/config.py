"""Flat key=value scenario configuration.

The format is deliberately minimal for diffable test fixtures: one
``key = value`` pair per line, ``#`` comments, blank lines ignored.
Every key is optional; omitted keys take the reference-scenario defaults.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .model import ModelParams

__all__ = ["ScenarioConfig", "ConfigError", "load_config", "parse_config_text"]


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


_PARAM_KEYS = {f.name for f in dataclasses.fields(ModelParams)}

_FLOAT_KEYS = {
    "t_end",
    "dt",
    "dx",
    "x_min",
    "x_max",
    "dtau",
    "vartheta",
    "tau",
    "horizon",
}
_INT_KEYS = {"seed", "record_stride", "n_quad", "particles"}
_LIST_KEYS = {"theta0_list", "v0_list", "rho0_list"}
_STR_KEYS = {"methods", "mean_mode"}

_KNOWN_METHODS = ("zakai", "ks", "discrete", "oracle")


@dataclass
class ScenarioConfig:
    """Merged defaults and overrides for a full comparison run."""

    params: ModelParams = field(default_factory=ModelParams)
    t_end: float = 1.0
    dt: float = 1e-3
    seed: int = 0
    record_stride: int = 1
    dx: float = 0.1
    x_min: float = 0.0
    x_max: float = 1.0
    methods: tuple = ("zakai",)
    mean_mode: str = "reconstructed"
    theta0_list: tuple = (0.05, 0.75)
    v0_list: tuple = (0.05, 0.5)
    rho0_list: tuple = (0.25,)
    dtau: float = 1e-2
    vartheta: float = 0.5
    n_quad: int = 21
    particles: int = 50_000
    tau: float = 0.5
    horizon: float = 0.25

    def scenarios(self):
        """All (theta0, v0, rho0) cells of the scenario matrix, in order."""
        return [
            (th, v, r)
            for th in self.theta0_list
            for v in self.v0_list
            for r in self.rho0_list
        ]


def parse_config_text(text: str) -> ScenarioConfig:
    overrides = {}
    params_over = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        try:
            if key in _PARAM_KEYS:
                params_over[key] = float(value)
            elif key in _FLOAT_KEYS:
                overrides[key] = float(value)
            elif key in _INT_KEYS:
                overrides[key] = int(value)
            elif key in _LIST_KEYS:
                overrides[key] = tuple(float(v) for v in value.split(",") if v.strip())
            elif key == "methods":
                overrides[key] = tuple(v.strip() for v in value.split(",") if v.strip())
            elif key == "mean_mode":
                overrides[key] = value
            else:
                raise ConfigError(f"unknown config key {key!r}")
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"invalid value for {key!r}: {value!r}") from exc

    try:
        params = ModelParams(**params_over)
    except ValueError as exc:
        # surface which key failed validation
        bad = _blame_param(params_over)
        raise ConfigError(f"invalid parameter {bad!r}: {exc}") from exc
    config = ScenarioConfig(params=params, **overrides)
    _validate(config)
    return config


def _blame_param(overrides: dict) -> str:
    """Find which overridden parameter makes ModelParams reject the set."""
    for key in overrides:
        trial = dict(overrides)
        del trial[key]
        try:
            ModelParams(**trial)
        except ValueError:
            continue
        return key
    return ",".join(overrides)


def _validate(config: ScenarioConfig):
    if config.dt <= 0 or config.dt > config.t_end:
        raise ConfigError("invalid value for 'dt': need 0 < dt <= t_end")
    if config.dx <= 0:
        raise ConfigError("invalid value for 'dx': must be positive")
    if config.x_min >= config.x_max:
        raise ConfigError("invalid value for 'x_min': must be below x_max")
    if config.record_stride < 1:
        raise ConfigError("invalid value for 'record_stride': must be >= 1")
    for m in config.methods:
        if m not in _KNOWN_METHODS:
            raise ConfigError(
                f"invalid value for 'methods': unknown method {m!r} "
                f"(known: {', '.join(_KNOWN_METHODS)})"
            )
    if config.mean_mode not in ("oracle", "reconstructed"):
        raise ConfigError("invalid value for 'mean_mode'")
    if not 0.0 <= config.vartheta <= 1.0:
        raise ConfigError("invalid value for 'vartheta': must lie in [0, 1]")
    if config.dtau <= 0:
        raise ConfigError("invalid value for 'dtau': must be positive")
    if config.n_quad < 2:
        raise ConfigError("invalid value for 'n_quad': must be >= 2")
    if config.particles < 1:
        raise ConfigError("invalid value for 'particles': must be >= 1")
    if config.horizon <= 0:
        raise ConfigError("invalid value for 'horizon': must be positive")
    if config.tau < 0.0:
        raise ConfigError("invalid value for 'tau': must be non-negative")
    for key in ("theta0_list", "rho0_list"):
        for v in getattr(config, key):
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"invalid value for {key!r}: entries must lie in [0, 1]")
    for v in config.v0_list:
        if not 0.0 <= v <= config.params.v_max:
            raise ConfigError("invalid value for 'v0_list': entries must lie in [0, v_max]")


def load_config(path) -> ScenarioConfig:
    """Parse a flat key=value config file, merging with defaults."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    return parse_config_text(p.read_text())
