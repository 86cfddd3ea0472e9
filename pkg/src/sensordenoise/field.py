"""Sensor positions, target concepts and the two label-noise models.

Positions are stored as an ``(N, d)`` float array of points in the closed
unit ball; labels are ``int8`` arrays with values in ``{-1, +1}``.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Union

import numpy as np

from .errors import (
    ConfigurationError,
    DimensionMismatchError,
    InvalidDimensionError,
    NonTerminationError,
)

if TYPE_CHECKING:
    from .graph import NeighborGraph

SeedLike = Union[None, int, np.random.SeedSequence, np.random.Generator]

FLOAT_FMT = ".17g"


def as_rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sign_labels(values: np.ndarray) -> np.ndarray:
    """Sign with ``sign(0) = +1``, as ``int8``."""
    return np.where(np.asarray(values) >= 0, 1, -1).astype(np.int8)


@dataclass(frozen=True)
class LinearTarget:
    """Homogeneous halfspace ``sign(w . x)``."""

    weight: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weight, dtype=float).reshape(-1)
        if w.size == 0:
            raise InvalidDimensionError("weight must have at least one coordinate")
        if abs(np.linalg.norm(w) - 1.0) > 1e-12:
            raise ConfigurationError("linear target weight must have unit norm")
        object.__setattr__(self, "weight", w)

    @property
    def dim(self) -> int:
        return self.weight.size

    def decision(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=float) @ self.weight

    def labels(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.dim:
            raise DimensionMismatchError(f"points have dimension {X.shape[1]}, target has {self.dim}")
        return sign_labels(self.decision(X))

    def negated(self) -> "LinearTarget":
        return LinearTarget(-self.weight)


@dataclass(frozen=True)
class SineTarget:
    """Planar boundary ``x2 = A sin(omega x1)``; points above it are positive."""

    amplitude: float = 0.5
    frequency: float = 2 * math.pi

    @property
    def dim(self) -> int:
        return 2

    def decision(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return X[:, 1] - self.amplitude * np.sin(self.frequency * X[:, 0])

    def labels(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != 2:
            raise DimensionMismatchError("the sine boundary is only defined in two dimensions")
        # strictly above the curve is positive; on the curve also +1
        return sign_labels(self.decision(X))


TargetConcept = Union[LinearTarget, SineTarget]


@dataclass(frozen=True)
class SensorField:
    positions: np.ndarray
    true_labels: np.ndarray
    current_labels: np.ndarray
    target: TargetConcept
    noise_rate_param: float = 0.0

    def __post_init__(self):
        n = len(self.positions)
        if not (len(self.true_labels) == len(self.current_labels) == n):
            raise ConfigurationError("positions and label sequences must share length")

    @property
    def n(self) -> int:
        return len(self.positions)

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    @property
    def margin(self) -> float:
        """Majority margin ``1/2 - eta``."""
        return 0.5 - self.noise_rate_param

    def with_labels(self, labels: np.ndarray, noise_rate_param: float | None = None) -> "SensorField":
        labels = np.asarray(labels, dtype=np.int8).copy()
        eta = self.noise_rate_param if noise_rate_param is None else noise_rate_param
        return replace(self, current_labels=labels, noise_rate_param=eta)


def sample_unit_ball(n: int, d: int, seed: SeedLike = None) -> np.ndarray:
    """Draw ``n`` points uniformly from the ``d``-dimensional unit ball.

    Directions come from normalized isotropic Gaussians and radii from
    inverting the radial CDF, ``u ** (1/d)``.
    """
    if d < 1:
        raise InvalidDimensionError(f"dimension must be >= 1, got {d}")
    if n < 0:
        raise ConfigurationError(f"n must be >= 0, got {n}")
    rng = as_rng(seed)
    g = rng.standard_normal((n, d))
    norms = np.linalg.norm(g, axis=1)
    # a zero Gaussian draw has probability zero; guard anyway
    norms[norms == 0] = 1.0
    radii = rng.random(n) ** (1.0 / d)
    return g * (radii / norms)[:, None]


def random_linear_target(d: int, seed: SeedLike = None) -> LinearTarget:
    if d < 1:
        raise InvalidDimensionError(f"dimension must be >= 1, got {d}")
    rng = as_rng(seed)
    while True:
        g = rng.standard_normal(d)
        norm = np.linalg.norm(g)
        if norm > 0:
            w = g / norm
            # renormalize once more so the 1e-12 unit-norm check is robust
            return LinearTarget(w / np.linalg.norm(w))


def true_label(target: TargetConcept, x) -> int:
    x = np.asarray(x, dtype=float).reshape(1, -1)
    return int(target.labels(x)[0])


def make_field(positions: np.ndarray, target: TargetConcept) -> SensorField:
    """Field with current labels equal to the true labels."""
    positions = np.asarray(positions, dtype=float)
    if positions.ndim != 2:
        positions = positions.reshape(len(positions), -1)
    if positions.shape[1] != target.dim:
        raise DimensionMismatchError("positions and target dimension differ")
    labels = target.labels(positions) if len(positions) else np.zeros(0, dtype=np.int8)
    return SensorField(positions, labels, labels.copy(), target, 0.0)


def _flag_eta(eta: float) -> None:
    if not 0.0 <= eta <= 1.0:
        raise ConfigurationError(f"noise rate must lie in [0, 1], got {eta}")
    if eta >= 0.5:
        warnings.warn(f"noise rate {eta} >= 1/2: the majority carries no signal", stacklevel=3)


def corrupt_random(field: SensorField, eta: float, seed: SeedLike = None) -> SensorField:
    """Flip every true label independently with probability ``eta``."""
    _flag_eta(eta)
    rng = as_rng(seed)
    flip = rng.random(field.n) < eta
    labels = np.where(flip, -field.true_labels, field.true_labels).astype(np.int8)
    return field.with_labels(labels, eta)


def corrupt_pockets(field: SensorField, graph: "NeighborGraph", eta: float,
                    seed: SeedLike = None) -> SensorField:
    """Corrupt whole closed neighborhoods until at least ``eta`` of sensors are wrong.

    Corrupted sensors are set to the negation of their true label, so
    overlapping pockets never cancel each other.
    """
    _flag_eta(eta)
    if graph.n != field.n:
        raise ConfigurationError("graph and field sizes differ")
    rng = as_rng(seed)
    n = field.n
    corrupted = np.zeros(n, dtype=bool)
    count = 0
    picks = 0
    target_count = eta * n
    while count < target_count:
        if picks >= 100 * n:
            raise NonTerminationError(f"pocket corruption did not reach eta={eta} after {picks} picks")
        i = int(rng.integers(n))
        picks += 1
        members = np.append(graph.neighbors(i), i)
        fresh = members[~corrupted[members]]
        corrupted[fresh] = True
        count += fresh.size
    labels = np.where(corrupted, -field.true_labels, field.true_labels).astype(np.int8)
    return field.with_labels(labels, eta)


def write_field_csv(field: SensorField, path) -> None:
    header = [f"x{k}" for k in range(field.dim)] + ["true_label", "current_label"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for x, t, c in zip(field.positions, field.true_labels, field.current_labels):
            w.writerow([format(float(v), FLOAT_FMT) for v in x] + [int(t), int(c)])


def read_field_csv(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(positions, true_labels, current_labels)`` from a field dump."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ConfigurationError(f"{path}: empty field file")
    header, body = rows[0], rows[1:]
    d = len(header) - 2
    if d < 1 or header[-2:] != ["true_label", "current_label"]:
        raise ConfigurationError(f"{path}: unexpected header {header}")
    data = np.array(body, dtype=float).reshape(len(body), d + 2)
    return data[:, :d], data[:, d].astype(np.int8), data[:, d + 1].astype(np.int8)
