"""Passive baseline: regularized hinge minimization on a uniform random sample.

The regularization strength is picked from a grid by an evaluation
functional supplied by the caller, which makes this an optimistic baseline
when the functional is the true error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..errors import ConfigurationError, DegenerateSolutionError
from ..field import SeedLike, as_rng
from .linear import LinearHypothesis
from .oracle import LabelOracle

DEFAULT_REG_GRID = (1e-4, 1e-3, 1e-2, 1e-1, 1.0)


@dataclass(frozen=True)
class RegularizedFit:
    """Raw (unnormalized) weight vector with the objective it reached."""

    weight: np.ndarray
    objective: float
    reg: float

    def hypothesis(self) -> LinearHypothesis:
        return LinearHypothesis.from_vector(self.weight)


def regularized_objective(w, X, y, reg: float) -> float:
    margins = y * (X @ w)
    return float(reg * (w @ w) + np.mean(np.maximum(0.0, 1.0 - margins)))


def fit_regularized_hinge(X, y, reg: float, iterations: int = 2000) -> RegularizedFit:
    """Minimize ``reg * ||w||^2 + mean hinge`` by Pegasos-style subgradient steps.

    The step at iteration ``t`` is ``1 / (2 reg t)`` and iterates are kept in
    the ball of radius ``1 / sqrt(reg)``, which contains the minimizer. The
    best objective seen is returned.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    if len(y) == 0:
        raise ConfigurationError("cannot fit an empty sample")
    if reg <= 0:
        raise ConfigurationError("regularization must be positive")
    n, d = X.shape
    cap = 1.0 / math.sqrt(reg)
    w = np.zeros(d)
    best_w, best = w, regularized_objective(w, X, y, reg)
    for t in range(1, iterations + 1):
        active = y * (X @ w) < 1.0
        g = 2.0 * reg * w - (y[active] @ X[active]) / n
        w = w - g / (2.0 * reg * t)
        norm = np.linalg.norm(w)
        if norm > cap:
            w = w * (cap / norm)
        obj = regularized_objective(w, X, y, reg)
        if obj < best:
            best, best_w = obj, w
    return RegularizedFit(best_w, best, reg)


def passive_baseline(oracle: LabelOracle, positions, budget: int,
                     evaluation: Callable[[LinearHypothesis], float],
                     reg_grid: Sequence[float] = DEFAULT_REG_GRID,
                     seed: SeedLike = None, iterations: int = 2000) -> LinearHypothesis:
    """Query ``budget`` uniform random sensors and keep the best-evaluated fit over ``reg_grid``."""
    if not len(reg_grid):
        raise ConfigurationError("regularization grid is empty")
    if budget < 1:
        raise ConfigurationError("passive baseline needs a budget of at least 1")
    positions = np.asarray(positions, dtype=float)
    rng = as_rng(seed)
    idx = rng.choice(len(positions), size=min(budget, len(positions)), replace=False)
    y = oracle.query_many(idx)
    X = positions[idx]
    best_h, best_score = None, math.inf
    for reg in reg_grid:
        try:
            h = fit_regularized_hinge(X, y, reg, iterations).hypothesis()
        except DegenerateSolutionError:
            continue  # all-zero fit, e.g. overwhelming regularization
        score = evaluation(h)
        if score < best_score:
            best_h, best_score = h, score
    if best_h is None:
        raise DegenerateSolutionError("every regularization level produced a zero weight vector")
    return best_h
