"""Experiment configuration files (JSON)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from .core import DomainError, field_from_json
from .homomorphisms import BlackBoxHomomorphism, from_spec

FORMATS = ("json", "csv")


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


@dataclass
class ExperimentConfig:
    experiment: str = "experiment"
    homomorphism: dict = field(default_factory=dict)
    source: dict | None = None
    target: dict | None = None
    field_spec: object = "real"
    probes: dict = field(default_factory=lambda: {"count": 5, "seed": 0})
    n_max: int | None = None
    tol: float = 1e-10
    alpha: float | None = None
    bootstrap: bool = False
    expected: dict = field(default_factory=dict)
    output: dict = field(default_factory=lambda: {"format": "json"})
    base_dir: Path | None = None

    @property
    def seed(self) -> int:
        return int(self.probes.get("seed", 0))

    @property
    def probe_count(self) -> int:
        return int(self.probes.get("count", 5))

    @property
    def format(self) -> str:
        return self.output.get("format", "json")

    def build_homomorphism(self) -> BlackBoxHomomorphism:
        spec = dict(self.homomorphism)
        if "map" not in spec:
            raise ConfigError("homomorphism spec needs a 'map' key")
        if self.source is not None:
            spec.setdefault("source", self.source)
            spec.setdefault("group", self.source)
        if self.target is not None:
            spec.setdefault("target", self.target)
        for key in ("source", "target", "group"):
            g = spec.get(key)
            if isinstance(g, dict) and g.get("group") == "abelian" and "field" not in g:
                spec[key] = {**g, "field": self.field_spec}
        try:
            g = from_spec(spec, self.base_dir)
        except (KeyError, TypeError, ValueError, DomainError, OSError) as exc:
            raise ConfigError(f"cannot build homomorphism: {exc}") from None
        if self.alpha is not None:
            g = replace(g, alpha=self.alpha)
        return g


_KEYS = {"experiment", "homomorphism", "source", "target", "field", "probes", "n_max", "tol",
         "alpha", "bootstrap", "expected", "output"}


def config_from_dict(data: dict, base_dir: Path | None = None) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(data) - _KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    cfg = ExperimentConfig(base_dir=base_dir)
    for key in _KEYS:
        if key in data:
            setattr(cfg, "field_spec" if key == "field" else key, data[key])
    if not isinstance(cfg.homomorphism, dict):
        raise ConfigError("'homomorphism' must be an object")
    if not isinstance(cfg.probes, dict):
        raise ConfigError("'probes' must be an object")
    try:
        field_from_json(cfg.field_spec)
        cfg.tol = float(cfg.tol)
        if cfg.alpha is not None:
            cfg.alpha = float(cfg.alpha)
        if cfg.n_max is not None:
            cfg.n_max = int(cfg.n_max)
        if cfg.probe_count < 1:
            raise ConfigError("probes.count must be positive")
        if cfg.seed < 0:
            raise ConfigError("probes.seed must be nonnegative")
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    if not cfg.tol > 0:
        raise ConfigError("tol must be positive")
    if cfg.alpha is not None and not 0 < cfg.alpha <= 1:
        raise ConfigError("alpha must lie in ]0, 1]")
    if cfg.n_max is not None and cfg.n_max < 1:
        raise ConfigError("n_max must be positive")
    if cfg.format not in FORMATS:
        raise ConfigError(f"output.format must be one of {FORMATS}")
    for key, val in cfg.expected.items():
        if key.endswith("tol") and not float(val) > 0:
            raise ConfigError(f"expected.{key} must be positive")
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: malformed JSON: {exc}") from None
    return config_from_dict(data, path.parent)
