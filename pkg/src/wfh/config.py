"""Run configuration: JSON file plus command-line overrides."""

from __future__ import annotations

import dataclasses
import json
import math
import os
from dataclasses import dataclass, fields

import numpy as np

from .decision import RuleKind
from .receiver import BpskSource, ReceiverConfig

SWEEPABLE = ("z_sq", "q0", "tau", "xi", "alpha_sq")
RULES = ("auto", "sign", "map")
SEED_ENV = "WFH_SEED"

DEFAULT_GRIDS = {
    "z_sq": np.linspace(0.5, 30.0, 50).tolist(),
    "q0": np.round(np.arange(0.5, 0.951, 0.05), 12).tolist(),
}


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class RunConfig:
    alpha_sq: float = 1.97
    q0: float = 0.5
    z_sq: float = 10.0
    tau: float = 0.5
    xi: float = 0.91
    dark_mean: float = 0.0
    rule: str = "auto"
    sweep: str | None = None
    grid: list[float] | None = None
    mc: bool = False
    n_sets: int = 3
    set_size: int = 50_000
    seed: int | None = None
    csv: str | None = None
    svg: str | None = None
    workers: int = 1

    @classmethod
    def from_json(cls, path: str) -> RunConfig:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"{path} is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config", "top level must be a JSON object")
        return cls().updated(data)

    def updated(self, overrides: dict) -> RunConfig:
        known = {f.name for f in fields(self)}
        for key in overrides:
            if key not in known:
                raise ConfigError(key, "unknown configuration field")
        new = dataclasses.replace(self, **overrides)
        if isinstance(new.grid, str):
            new.grid = parse_grid(new.grid)
        return new

    def resolved_seed(self) -> int:
        if self.seed is not None:
            return int(self.seed)
        env = os.environ.get(SEED_ENV)
        if env is None:
            return 0
        try:
            return int(env)
        except ValueError:
            raise ConfigError("seed", f"{SEED_ENV}={env!r} is not an integer") from None

    def resolved_grid(self) -> list[float]:
        if self.grid is not None:
            return [float(v) for v in self.grid]
        if self.sweep in DEFAULT_GRIDS:
            return list(DEFAULT_GRIDS[self.sweep])
        raise ConfigError("grid", f"no default grid for sweep over {self.sweep!r}; pass --grid")

    def rule_kind(self, tau: float) -> RuleKind:
        if self.rule == "auto":
            return RuleKind.SIGN_RANDOMIZED if tau == 0.5 else RuleKind.MAP_THRESHOLD
        return RuleKind(self.rule)

    def at(self, value: float | None) -> RunConfig:
        """Copy with the swept parameter set to ``value``."""
        if self.sweep is None or value is None:
            return self
        return dataclasses.replace(self, **{self.sweep: float(value)})

    def source(self) -> BpskSource:
        return BpskSource(self.alpha_sq, self.q0)

    def receiver(self) -> ReceiverConfig:
        return ReceiverConfig(self.z_sq, self.tau, self.xi, self.dark_mean)

    def validate(self, require_sweep: bool) -> None:
        """Raise ConfigError naming the first offending field."""
        for name in ("alpha_sq", "q0", "z_sq", "tau", "xi", "dark_mean"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ConfigError(name, f"must be a finite number, got {value!r}")
        _check_point(self)

        if self.rule not in RULES:
            raise ConfigError("rule", f"must be one of {', '.join(RULES[1:])}, got {self.rule!r}")
        for name, lo in (("n_sets", 2), ("set_size", 1), ("workers", 1)):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < lo:
                raise ConfigError(name, f"must be an integer >= {lo}, got {value!r}")
        seed = self.resolved_seed()
        if not 0 <= seed < 2**64:
            raise ConfigError("seed", "must be an unsigned 64-bit integer")
        if not isinstance(self.mc, bool):
            raise ConfigError("mc", "must be true or false")

        if not require_sweep:
            if self.sweep is not None:
                raise ConfigError("sweep", "the point command does not take a sweep")
            return
        if self.sweep is None:
            raise ConfigError("sweep", f"a sweep parameter is required (one of {', '.join(SWEEPABLE)})")
        if self.sweep not in SWEEPABLE:
            raise ConfigError("sweep", f"must be one of {', '.join(SWEEPABLE)}, got {self.sweep!r}")
        grid = self.resolved_grid()
        if not grid:
            raise ConfigError("grid", "grid is empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("grid", "grid values must be strictly increasing")
        for value in grid:
            try:
                _check_point(self.at(value))
            except ConfigError as exc:
                raise ConfigError("grid", f"value {value!r} is invalid for {exc}") from None


def _check_point(cfg: RunConfig) -> None:
    checks = (
        ("alpha_sq", cfg.alpha_sq >= 0, "must be >= 0"),
        ("q0", 0 <= cfg.q0 <= 1, "must lie in [0, 1]"),
        ("z_sq", cfg.z_sq >= 0, "must be >= 0"),
        ("tau", 0 < cfg.tau < 1, "must lie in (0, 1)"),
        ("xi", 0 <= cfg.xi <= 1, "must lie in [0, 1]"),
        ("dark_mean", cfg.dark_mean >= 0, "must be >= 0"),
    )
    for name, ok, message in checks:
        if not ok:
            raise ConfigError(name, f"{message}, got {getattr(cfg, name)!r}")
    if cfg.rule == "sign" and cfg.tau != 0.5:
        raise ConfigError("rule", f"the sign rule needs tau = 0.5, got tau={cfg.tau!r}")


def parse_grid(text: str) -> list[float]:
    """``start:stop:n`` (inclusive linspace) or a comma-separated list."""
    text = text.strip()
    if not text:
        return []
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValueError
            start, stop, n = float(parts[0]), float(parts[1]), int(parts[2])
            if n < 1:
                raise ValueError
            return np.linspace(start, stop, n).tolist()
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError("grid", f"cannot parse {text!r}; use start:stop:n or a comma list") from None

