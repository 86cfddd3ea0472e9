"""Noise and generalization error measurements."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DimensionMismatchError
from .field import SeedLike, SensorField, sample_unit_ball, sign_labels


@dataclass(frozen=True)
class ErrorReport:
    noise_rate: float
    generalization_error: float
    angle_radians: float | None = None
    labels_used: int = 0

    def __post_init__(self):
        for v in (self.noise_rate, self.generalization_error):
            if not 0.0 <= v <= 1.0:
                raise ConfigurationError(f"rate {v} outside [0, 1]")
        if self.angle_radians is not None and not 0.0 <= self.angle_radians <= math.pi:
            raise ConfigurationError(f"angle {self.angle_radians} outside [0, pi]")


def noise_rate(field: SensorField) -> float:
    if field.n == 0:
        return 0.0
    return float(np.mean(field.current_labels != field.true_labels))


def _weight(h) -> np.ndarray:
    return np.asarray(getattr(h, "weight", h), dtype=float).reshape(-1)


def angle_between(h, target) -> float:
    a, b = _weight(h), _weight(target)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"dimensions {a.size} and {b.size} differ")
    return float(np.arccos(np.clip(a @ b, -1.0, 1.0)))


def angle_error(h, target) -> float:
    """Disagreement mass ``arccos(h . target) / pi`` of two separators through the origin."""
    return angle_between(h, target) / math.pi


def empirical_error(h, target, n_test: int, seed: SeedLike = None) -> float:
    """Disagreement of ``h`` with ``target`` on ``n_test`` fresh uniform points.

    ``h`` may be anything with ``predict(X)`` or ``decision(X)``.
    """
    if n_test < 1:
        raise ConfigurationError("n_test must be >= 1")
    X = sample_unit_ball(n_test, target.dim, seed)
    pred = h.predict(X) if hasattr(h, "predict") else sign_labels(h.decision(X))
    return float(np.mean(pred != target.labels(X)))
