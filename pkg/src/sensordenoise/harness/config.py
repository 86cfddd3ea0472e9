"""Experiment configuration read from flat ``key = value`` files.

Lines starting with ``#`` (and anything after a ``#``) are ignored. Keys are
the :class:`ExperimentConfig` field names; sequences are comma separated.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..errors import ConfigurationError

NOISE_MODELS = ("random", "pockets")
RULES = ("majority", "conservative")
TARGETS = ("linear", "sine")
KERNELS = ("none", "gaussian", "linear")
SWEEP_PARAMS = ("n_sensors", "radius")


def _default_eta_grid() -> tuple[float, ...]:
    return tuple(round(0.05 * k, 2) for k in range(0, 10))


@dataclass(frozen=True)
class ExperimentConfig:
    n_sensors: int = 10000
    dimension: int = 2
    radius: float = 0.1
    noise_model: str = "random"
    eta: float = 0.35
    eta_grid: tuple[float, ...] = field(default_factory=_default_eta_grid)
    rule: str = "majority"
    schedule: str = "sync"
    rounds: int = 100
    direction_budget: int = 64
    budgets: tuple[int, ...] = (5, 10, 20, 30, 45, 60)
    trials: int = 50
    seed: int = 0
    output_dir: str = "out"
    workers: int = 1
    target: str = "linear"
    amplitude: float = 0.5
    frequency: float = 2 * math.pi
    kernel: str = "none"
    bandwidth: float = 0.1
    band_constant: float = 1.0
    radius_constant: float = 1.0
    hinge_scale_constant: float = 0.2
    max_rounds: int = 4
    reg_grid: tuple[float, ...] = (1e-4, 1e-3, 1e-2, 1e-1, 1.0)
    n_test: int = 20000
    sweep_param: str = "n_sensors"
    sweep_values: tuple[float, ...] = (1000, 5000, 25000)

    def __post_init__(self):
        checks = [
            (self.n_sensors >= 1, "n_sensors must be >= 1"),
            (self.dimension >= 1, "dimension must be >= 1"),
            (self.radius > 0, "radius must be positive"),
            (self.noise_model in NOISE_MODELS, f"noise_model must be one of {NOISE_MODELS}"),
            (0.0 <= self.eta <= 1.0, "eta must lie in [0, 1]"),
            (all(0.0 <= e <= 1.0 for e in self.eta_grid), "eta_grid values must lie in [0, 1]"),
            (self.rule in RULES, f"rule must be one of {RULES}"),
            (self.rounds >= 0, "rounds must be >= 0"),
            (self.trials >= 1, "trials must be >= 1"),
            (self.seed >= 0, "seed must be non-negative"),
            (self.workers >= 1, "workers must be >= 1"),
            (self.target in TARGETS, f"target must be one of {TARGETS}"),
            (self.kernel in KERNELS, f"kernel must be one of {KERNELS}"),
            (self.bandwidth > 0, "bandwidth must be positive"),
            (min(self.band_constant, self.radius_constant, self.hinge_scale_constant) > 0,
             "schedule constants must be positive"),
            (self.max_rounds >= 1, "max_rounds must be >= 1"),
            (self.n_test >= 1, "n_test must be >= 1"),
            (self.sweep_param in SWEEP_PARAMS, f"sweep_param must be one of {SWEEP_PARAMS}"),
            (self.direction_budget >= 1, "direction_budget must be >= 1"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigurationError(msg)
        if any(b < 2 for b in self.budgets):
            raise ConfigurationError("budgets must be >= 2")
        if any(b2 <= b1 for b1, b2 in zip(self.budgets, self.budgets[1:])):
            raise ConfigurationError("budgets must be strictly increasing")
        if self.target == "sine" and self.dimension != 2:
            raise ConfigurationError("the sine target needs dimension 2")
        if self.target == "sine" and self.kernel == "none":
            raise ConfigurationError("the sine target needs a kernel learner")

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


def _convert(name: str, raw: str, ftype: Any) -> Any:
    text = raw.strip()
    try:
        if ftype in ("int", int):
            value = float(text)
            if value != int(value):
                raise ValueError
            return int(value)
        if ftype in ("float", float):
            return float(text)
        if ftype in ("str", str):
            return text
        if "tuple[int" in str(ftype):
            return tuple(int(float(v)) for v in text.split(",") if v.strip())
        if "tuple[float" in str(ftype):
            return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ConfigurationError(f"bad value for {name}: {raw!r}") from None
    raise ConfigurationError(f"unsupported field type for {name}")


def parse_config(text: str, **overrides) -> ExperimentConfig:
    types = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}
    values: dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in types:
            raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigurationError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _convert(key, raw, types[key])
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values)


def load_config(path, **overrides) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, **overrides)


def dump_config(config: ExperimentConfig) -> str:
    lines = []
    for f in dataclasses.fields(config):
        v = getattr(config, f.name)
        if isinstance(v, tuple):
            v = ", ".join(format(x, ".17g") if isinstance(x, float) else str(x) for x in v)
        elif isinstance(v, float):
            v = format(v, ".17g")
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"
