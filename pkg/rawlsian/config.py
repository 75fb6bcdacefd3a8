# rawlsian/config.py
"""Configuration loading and validation."""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

_log = logging.getLogger(__name__)

METHODS = ("flat1", "flat2", "fat", "baseline")
STATS_MODES = ("full", "spherical", "score")


def _clamp(value: float, lo: float, hi: float, name: str) -> float:
    """Clamp a value to [lo, hi], logging a warning if out of range."""
    if lo <= value <= hi:
        return value
    clamped = max(lo, min(hi, value))
    _log.warning("%s=%.4g out of range [%.4g, %.4g]; clamping to %.4g.", name, value, lo, hi, clamped)
    return clamped


@dataclass
class OracleConfig:
    max_domain: int = 24
    max_optima: int = 64
    dual_resolution: int = 1000

    def __post_init__(self) -> None:
        self.max_domain = int(_clamp(self.max_domain, 1, 24, "oracle.max_domain"))
        self.max_optima = max(1, self.max_optima)
        self.dual_resolution = max(1, self.dual_resolution)


@dataclass
class FatConfig:
    grid_points: int = 100_000

    def __post_init__(self) -> None:
        self.grid_points = max(2, self.grid_points)


@dataclass
class FlatConfig:
    tol_kappa: float = 1e-6
    max_bisection: int = 200
    feasibility_iters: int = 400
    step_scale: float = 0.5
    kappa_cap: float = 1e6
    oracle_directions: int = 200_000

    def __post_init__(self) -> None:
        self.tol_kappa = _clamp(self.tol_kappa, 1e-12, 1e-1, "flat.tol_kappa")
        self.max_bisection = max(1, self.max_bisection)
        self.feasibility_iters = max(1, self.feasibility_iters)
        self.step_scale = _clamp(self.step_scale, 1e-6, 10.0, "flat.step_scale")
        self.kappa_cap = _clamp(self.kappa_cap, 1.0, 1e6, "flat.kappa_cap")
        self.oracle_directions = max(8, self.oracle_directions)


@dataclass
class StatsConfig:
    mode: str = "full"
    regularization: float = 1e-9

    def __post_init__(self) -> None:
        if self.mode not in STATS_MODES:
            raise ValueError(f"stats.mode must be one of {', '.join(STATS_MODES)}; got {self.mode!r}")
        self.regularization = _clamp(self.regularization, 0.0, 1e-3, "stats.regularization")


@dataclass
class ExperimentConfig:
    train_fraction: float = 0.8
    repetitions: int = 10
    seed: int = 0
    methods: list[str] = field(default_factory=lambda: list(METHODS))

    def __post_init__(self) -> None:
        self.train_fraction = _clamp(self.train_fraction, 0.05, 0.95, "experiment.train_fraction")
        self.repetitions = max(1, self.repetitions)
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ValueError(
                f"Unknown experiment method(s) {', '.join(unknown)}; valid: {', '.join(METHODS)}"
            )


@dataclass
class RawlsianConfig:
    oracle: OracleConfig = field(default_factory=OracleConfig)
    fat: FatConfig = field(default_factory=FatConfig)
    flat: FlatConfig = field(default_factory=FlatConfig)
    stats: StatsConfig = field(default_factory=StatsConfig)
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)


def _merge_dataclass(instance: Any, overrides: dict) -> None:
    """Recursively merge a dict of overrides into a dataclass instance."""
    for key, value in overrides.items():
        if not hasattr(instance, key):
            _log.warning("Unknown config key %r; ignored (typo?)", key)
            continue
        current = getattr(instance, key)
        if isinstance(value, dict) and hasattr(current, "__dataclass_fields__"):
            _merge_dataclass(current, value)
            continue
        # Type coercion: bool before int (bool is subclass of int)
        if isinstance(current, list) and not isinstance(value, list):
            value = [value] if value is not None else []
        elif isinstance(current, bool) and not isinstance(value, bool):
            value = bool(value)
        elif isinstance(current, int) and not isinstance(value, (int, bool)):
            try:
                value = int(value)
            except (ValueError, TypeError):
                _log.warning("Cannot convert %r to int for %s; skipping", value, key)
                continue
        elif isinstance(current, float) and not isinstance(value, (float, int)):
            try:
                value = float(value)
            except (ValueError, TypeError):
                _log.warning("Cannot convert %r to float for %s; skipping", value, key)
                continue
        elif isinstance(current, float) and isinstance(value, int):
            value = float(value)
        setattr(instance, key, value)
    # Re-run validation after merging overrides
    if hasattr(instance, "__post_init__"):
        instance.__post_init__()


def load_config(path: str | Path | None) -> RawlsianConfig:
    """Load config from a YAML file, merging over defaults."""
    config = RawlsianConfig()
    if path is None:
        return config
    path = Path(path)
    if path.exists():
        with open(path) as f:
            data = yaml.safe_load(f) or {}
        if not isinstance(data, dict):
            raise ValueError(f"Config file {path} must contain a mapping at top level")
        _merge_dataclass(config, data)
    else:
        _log.debug("No config file at %s; using defaults", path)
    return config
