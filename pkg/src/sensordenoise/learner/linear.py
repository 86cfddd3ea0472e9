"""Margin-based active learning of homogeneous linear separators.

Each round samples labels inside a band around the current separator and
then minimizes a scaled hinge loss over a ball around the current weight
vector. Band width, ball radius and hinge scale all halve per round.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError, DegenerateSolutionError, EmptyBandError, NumericalError
from ..field import SeedLike, as_rng, sign_labels
from .oracle import LabelOracle


@dataclass(frozen=True)
class SolverParams:
    max_iterations: int = 300
    step_size: float = 1.0
    tolerance: float = 1e-9

    def __post_init__(self):
        if self.max_iterations <= 0 or self.step_size <= 0 or self.tolerance <= 0:
            raise ConfigurationError("solver parameters must be positive")


@dataclass(frozen=True)
class ActiveConfig:
    rounds: int
    labels_per_round: int
    initial_sample: int
    band_constant: float = 1.0
    radius_constant: float = 1.0
    hinge_scale_constant: float = 0.2
    solver: SolverParams = field(default_factory=SolverParams)

    def __post_init__(self):
        if self.rounds < 0 or self.labels_per_round < 1 or self.initial_sample < 1:
            raise ConfigurationError("rounds >= 0, labels_per_round >= 1 and initial_sample >= 1 required")
        if min(self.band_constant, self.radius_constant, self.hinge_scale_constant) <= 0:
            raise ConfigurationError("schedule constants must be positive")

    def band(self, k: int) -> float:
        return self.band_constant * 2.0 ** -k

    def radius(self, k: int) -> float:
        return self.radius_constant * 2.0 ** -k

    def tau(self, k: int) -> float:
        return self.hinge_scale_constant * 2.0 ** -k

    @property
    def label_cost(self) -> int:
        return self.initial_sample + self.rounds * self.labels_per_round

    @classmethod
    def default(cls, d: int, rounds: int = 4, **kw) -> "ActiveConfig":
        return cls(rounds=rounds, labels_per_round=15 * d, initial_sample=15 * d, **kw)

    @classmethod
    def for_budget(cls, budget: int, d: int, max_rounds: int = 4, **kw) -> "ActiveConfig":
        """Split a label budget into an initial sample and localization rounds.

        A third of the budget (at least ``d + 1`` labels) seeds the first
        hypothesis; the rest is spread evenly over up to ``max_rounds``
        rounds of at least ``d`` labels each. Leftover labels go to the
        initial sample, so the full budget is always spent.
        """
        if budget < 2:
            raise ConfigurationError("an active run needs a budget of at least 2")
        m0 = min(budget - 1, max(d + 1, budget // 3))
        rest = budget - m0
        rounds = max(1, min(max_rounds, rest // max(d, 1)))
        per = rest // rounds
        return cls(rounds=rounds, labels_per_round=per, initial_sample=budget - per * rounds, **kw)


@dataclass(frozen=True)
class LinearHypothesis:
    weight: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weight, dtype=float).reshape(-1)
        if abs(np.linalg.norm(w) - 1.0) > 1e-9:
            raise ConfigurationError("hypothesis weight must have unit norm")
        object.__setattr__(self, "weight", w)

    @classmethod
    def from_vector(cls, v) -> "LinearHypothesis":
        v = np.asarray(v, dtype=float)
        norm = np.linalg.norm(v)
        if not np.isfinite(norm):
            raise NumericalError("non-finite weight vector")
        if norm == 0:
            raise DegenerateSolutionError("cannot normalize a zero weight vector")
        return cls(v / norm)

    def decision(self, X) -> np.ndarray:
        return np.asarray(X, dtype=float) @ self.weight

    def predict(self, X) -> np.ndarray:
        return sign_labels(self.decision(X))


def hinge_loss(w, X, y, tau: float = 1.0) -> tuple[float, np.ndarray]:
    """Mean of ``max(0, 1 - y (w . x) / tau)`` and a subgradient in ``w``.

    At the kink the zero branch is taken.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    if len(y) == 0:
        raise ConfigurationError("hinge loss of an empty sample")
    if tau <= 0:
        raise ConfigurationError("tau must be positive")
    margins = y * (X @ np.asarray(w, dtype=float)) / tau
    active = margins < 1.0
    value = float(np.sum(1.0 - margins[active]) / len(y))
    grad = -(y[active] @ X[active]) / (tau * len(y))
    return value, grad


def _project_ball(v, center, radius):
    diff = v - center
    norm = np.linalg.norm(diff)
    if norm <= radius:
        return v
    return center + diff * (radius / norm)


def minimize_hinge_in_ball(center, radius: float, X, y, tau: float,
                           solver: SolverParams = SolverParams(), start=None) -> tuple[np.ndarray, float]:
    """Projected subgradient descent on the scaled hinge over ``||v - center|| <= radius``.

    Steps are normalized subgradients of length ``step_size * radius / sqrt(t)``.
    Returns the best iterate seen and its loss.
    """
    if radius <= 0:
        raise ConfigurationError("radius must be positive")
    center = np.asarray(center, dtype=float)
    v = center.copy() if start is None else _project_ball(np.asarray(start, dtype=float), center, radius)
    best_v, (best, g) = v, hinge_loss(v, X, y, tau)
    loss = best
    for t in range(1, solver.max_iterations + 1):
        if not np.isfinite(loss):
            raise NumericalError("hinge loss diverged")
        gnorm = np.linalg.norm(g)
        if gnorm == 0.0:
            break  # zero loss region; nothing left to improve
        step = solver.step_size * radius / math.sqrt(t)
        if step < solver.tolerance:
            break
        v = _project_ball(v - step * g / gnorm, center, radius)
        loss, g = hinge_loss(v, X, y, tau)
        if loss < best:
            best, best_v = loss, v
    if not np.all(np.isfinite(best_v)):
        raise NumericalError("solver produced a non-finite iterate")
    return best_v, best


def solve_constrained(w_prev: LinearHypothesis, X, y, tau: float, radius: float,
                      solver: SolverParams = SolverParams()) -> LinearHypothesis:
    """Minimize the ``tau``-scaled hinge within ``radius`` of ``w_prev``; return it normalized."""
    v, _ = minimize_hinge_in_ball(w_prev.weight, radius, X, y, tau, solver)
    return LinearHypothesis.from_vector(v)


def _uniform_indices(n: int, m: int, rng: np.random.Generator) -> np.ndarray:
    return rng.choice(n, size=min(m, n), replace=False)


def initial_hypothesis(oracle: LabelOracle, positions, m0: int, seed: SeedLike = None,
                       solver: SolverParams = SolverParams()) -> LinearHypothesis:
    """Hinge minimizer (``tau = 1``) over the unit ball on ``m0`` random sensors.

    For points in the unit ball every margin is below one, so the loss is
    linear and the minimizer is the normalized label-weighted mean.
    """
    if m0 < 1:
        raise ConfigurationError("the initial sample needs at least one label")
    positions = np.asarray(positions, dtype=float)
    rng = as_rng(seed)
    idx = _uniform_indices(len(positions), m0, rng)
    y = oracle.query_many(idx)
    X = positions[idx]
    d = positions.shape[1]
    v, _ = minimize_hinge_in_ball(np.zeros(d), 1.0, X, y, 1.0, solver)
    return LinearHypothesis.from_vector(v)


def band_indices(margins: np.ndarray, width: float, widenings: int = 4) -> tuple[np.ndarray, float]:
    """Sensors with ``|margin| <= width``, doubling the width up to ``widenings`` times."""
    abs_m = np.abs(margins)
    for _ in range(widenings + 1):
        idx = np.flatnonzero(abs_m <= width)
        if idx.size:
            return idx, width
        width *= 2.0
    raise EmptyBandError(f"no sensor within the band even at width {width / 2.0:g}")


def active_learn(oracle: LabelOracle, positions, config: ActiveConfig, seed: SeedLike = None,
                 history: list | None = None) -> LinearHypothesis:
    """Run the localized active learner and return the final separator.

    ``history``, when given, receives the hypothesis after every round
    (index 0 is the initial one).
    """
    positions = np.asarray(positions, dtype=float)
    if oracle.budget < config.label_cost:
        raise ConfigurationError(f"budget {oracle.budget} below the configured cost {config.label_cost}")
    rng = as_rng(seed)
    w = initial_hypothesis(oracle, positions, config.initial_sample, rng, config.solver)
    if history is not None:
        history.append(w)
    for k in range(1, config.rounds + 1):
        idx, _ = band_indices(positions @ w.weight, config.band(k))
        pick = idx[_uniform_indices(idx.size, config.labels_per_round, rng)]
        y = oracle.query_many(pick)
        w = solve_constrained(w, positions[pick], y, config.tau(k), config.radius(k), config.solver)
        if history is not None:
            history.append(w)
    return w
