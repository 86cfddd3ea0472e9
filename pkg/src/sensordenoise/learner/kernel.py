"""Kernelized localized active learner and a kernel passive baseline.

Hypotheses are finite expansions ``f(x) = sum_j c_j k(s_j, x)`` with unit
norm in the kernel's feature space. Each localization round solves the dual
of the scaled hinge problem restricted to the unit ball and the cap
``<w, w_prev> >= 1 - r^2 / 2``, then reads the new direction off the norm
term of that dual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from ..errors import (
    ConfigurationError,
    DegenerateSolutionError,
    DimensionMismatchError,
    InvalidKernelError,
    NumericalError,
)
from ..field import SeedLike, as_rng, sign_labels
from .linear import ActiveConfig, SolverParams, _uniform_indices, band_indices
from .oracle import LabelOracle


@dataclass(frozen=True)
class GaussianKernel:
    """``k(x, z) = exp(-||x - z||^2 / (2 bandwidth^2))``."""

    bandwidth: float = 0.1

    def __post_init__(self):
        if not self.bandwidth > 0:
            raise InvalidKernelError("Gaussian bandwidth must be positive")

    def __call__(self, A, B) -> np.ndarray:
        A = np.atleast_2d(np.asarray(A, dtype=float))
        B = np.atleast_2d(np.asarray(B, dtype=float))
        sq = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * A @ B.T
        return np.exp(-np.maximum(sq, 0.0) / (2.0 * self.bandwidth ** 2))

    def describe(self) -> str:
        return f"gaussian bandwidth={format(self.bandwidth, '.17g')}"


@dataclass(frozen=True)
class LinearKernel:
    """Plain inner product; reduces the kernel learner to the linear one."""

    def __call__(self, A, B) -> np.ndarray:
        A = np.atleast_2d(np.asarray(A, dtype=float))
        B = np.atleast_2d(np.asarray(B, dtype=float))
        return A @ B.T

    def describe(self) -> str:
        return "linear"


KernelSpec = Union[GaussianKernel, LinearKernel]


def kernel_from_name(name: str, bandwidth: float = 0.1) -> KernelSpec:
    name = name.strip().lower()
    if name == "gaussian":
        return GaussianKernel(bandwidth)
    if name == "linear":
        return LinearKernel()
    raise InvalidKernelError(f"unknown kernel {name!r}")


@dataclass(frozen=True)
class KernelHypothesis:
    support_indices: np.ndarray
    support_points: np.ndarray
    coefficients: np.ndarray
    kernel: KernelSpec = field(default_factory=GaussianKernel)

    def __post_init__(self):
        idx = np.asarray(self.support_indices, dtype=np.int64).reshape(-1)
        pts = np.atleast_2d(np.asarray(self.support_points, dtype=float))
        coef = np.asarray(self.coefficients, dtype=float).reshape(-1)
        if not (len(idx) == len(pts) == len(coef)):
            raise ConfigurationError("support indices, points and coefficients must share length")
        object.__setattr__(self, "support_indices", idx)
        object.__setattr__(self, "support_points", pts)
        object.__setattr__(self, "coefficients", coef)

    def decision(self, X) -> np.ndarray:
        return self.kernel(X, self.support_points) @ self.coefficients

    def predict(self, X) -> np.ndarray:
        return sign_labels(self.decision(X))

    @property
    def norm(self) -> float:
        K = self.kernel(self.support_points, self.support_points)
        return math.sqrt(max(float(self.coefficients @ K @ self.coefficients), 0.0))

    def linear_weight(self) -> np.ndarray:
        """Explicit weight vector; meaningful for the linear kernel only."""
        if not isinstance(self.kernel, LinearKernel):
            raise InvalidKernelError("an explicit weight exists only for the linear kernel")
        return self.coefficients @ self.support_points


def _normalized(indices, points, coef, kernel) -> KernelHypothesis:
    """Merge duplicate sensors, drop zero terms and scale to unit feature-space norm."""
    indices = np.asarray(indices, dtype=np.int64)
    uniq, first, inv = np.unique(indices, return_index=True, return_inverse=True)
    merged = np.zeros(uniq.size)
    np.add.at(merged, inv, coef)
    keep = merged != 0.0
    if not keep.any():
        raise DegenerateSolutionError("expansion has no nonzero coefficient")
    pts = np.asarray(points, dtype=float)[first][keep]
    merged = merged[keep]
    sq = float(merged @ kernel(pts, pts) @ merged)
    if not np.isfinite(sq):
        raise NumericalError("non-finite expansion norm")
    if sq <= 1e-300:
        raise DegenerateSolutionError("expansion has zero norm in feature space")
    return KernelHypothesis(uniq[keep], pts, merged / math.sqrt(sq), kernel)


def check_gram(gram, tolerance: float = 1e-8) -> np.ndarray:
    gram = np.asarray(gram, dtype=float)
    if gram.ndim != 2 or gram.shape[0] != gram.shape[1]:
        raise InvalidKernelError("gram matrix must be square")
    scale = max(1.0, float(np.abs(gram).max(initial=0.0)))
    if not np.allclose(gram, gram.T, atol=tolerance * scale):
        raise InvalidKernelError("gram matrix is not symmetric")
    if gram.size and np.linalg.eigvalsh(0.5 * (gram + gram.T))[0] < -tolerance * scale:
        raise InvalidKernelError("gram matrix is not positive semidefinite")
    return gram


class DualObjective:
    """Concave dual of the scaled hinge problem on the unit ball and the cap.

    ``value(alpha, beta) = tau sum(alpha) + tau beta (1 - r^2/2)
    - ||sum_i alpha_i y_i phi(x_i) + beta tau w_prev||``, with the norm
    expanded through ``gram`` and the previous hypothesis values ``prev``.
    Without ``prev`` the beta terms vanish. A positive ``smoothing`` replaces
    the norm by ``sqrt(norm^2 + smoothing^2)``.
    """

    def __init__(self, gram, labels, prev_values, tau: float, radius: float | None):
        if tau <= 0:
            raise ConfigurationError("tau must be positive")
        self.gram = gram
        self.y = np.asarray(labels, dtype=float)
        if self.y.shape != (gram.shape[0],):
            raise DimensionMismatchError("labels and gram matrix sizes differ")
        self.prev = None if prev_values is None else np.asarray(prev_values, dtype=float)
        if self.prev is not None and radius is None:
            raise ConfigurationError("a previous hypothesis needs a radius")
        self.tau = tau
        self.cap = None if self.prev is None else 1.0 - radius * radius / 2.0

    def _parts(self, alpha, beta):
        ay = alpha * self.y
        Kay = self.gram @ ay
        sq = ay @ Kay
        if self.prev is not None:
            bt = beta * self.tau
            sq += 2.0 * bt * (ay @ self.prev) + bt * bt
        return ay, Kay, max(sq, 0.0)

    def norm(self, alpha, beta=0.0) -> float:
        """Feature-space norm of the expansion the dual point encodes."""
        return math.sqrt(self._parts(alpha, beta)[2])

    def value(self, alpha, beta=0.0, smoothing: float = 0.0) -> float:
        sq = self._parts(alpha, beta)[2]
        v = self.tau * alpha.sum() - math.sqrt(sq + smoothing * smoothing)
        if self.prev is not None:
            v += self.tau * beta * self.cap
        return float(v)

    def gradient(self, alpha, beta=0.0, smoothing: float = 0.0) -> tuple[np.ndarray, float]:
        """Gradient of the smoothed objective; at ``smoothing = 0`` and a zero
        norm the norm term contributes nothing (a valid supergradient)."""
        ay, Kay, sq = self._parts(alpha, beta)
        norm = math.sqrt(sq + smoothing * smoothing)
        ga = np.full_like(alpha, self.tau)
        gb = self.tau * self.cap if self.prev is not None else 0.0
        if norm > 0.0:
            inner = Kay if self.prev is None else Kay + beta * self.tau * self.prev
            ga -= self.y * inner / norm
            if self.prev is not None:
                gb -= self.tau * (ay @ self.prev + beta * self.tau) / norm
        return ga, gb


SMOOTHING_STAGES = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6)


def kernel_dual_solve(gram, labels, prev_values, tau: float, radius: float | None,
                      solver: SolverParams = SolverParams(),
                      trace: list | None = None) -> tuple[np.ndarray, float]:
    """Projected gradient ascent with backtracking on the dual.

    ``alpha`` is clipped to ``[0, 1]`` and ``beta`` to ``[0, inf)`` after each
    step. The norm term is not differentiable where the expansion vanishes,
    and plain ascent can stall there, so the norm is smoothed by ``eps`` and
    ``eps`` shrinks stage by stage (relative to ``max(tau, 1)``) with warm
    starts. A step is accepted only if it passes the sufficient-increase test
    on the current smoothed objective. Shrinking ``eps`` only raises that
    objective, so the values collected in ``trace`` never decrease.
    Pass ``prev_values=None`` for the unlocalized problem (no beta).
    """
    gram = check_gram(gram)
    obj = DualObjective(gram, labels, prev_values, tau, radius)
    m = gram.shape[0]
    localized = obj.prev is not None
    alpha = np.full(m, 0.5)
    beta = 1.0 if localized else 0.0
    unit = max(tau, 1.0)
    for rel in SMOOTHING_STAGES:
        eps = rel * unit
        f = obj.value(alpha, beta, eps)
        if trace is not None:
            trace.append(f)
        step = 1.0
        for _ in range(solver.max_iterations):
            ga, gb = obj.gradient(alpha, beta, eps)
            while True:
                a_new = np.clip(alpha + step * ga, 0.0, 1.0)
                b_new = max(beta + step * gb, 0.0) if localized else 0.0
                da, db = a_new - alpha, b_new - beta
                moved = float(da @ da + db * db)
                f_new = obj.value(a_new, b_new, eps)
                if f_new >= f + float(ga @ da + gb * db) - moved / (2.0 * step) and f_new >= f:
                    break
                step *= 0.5
                if step < 1e-16:
                    break
            if step < 1e-16:
                break
            if not np.isfinite(f_new):
                raise NumericalError("dual objective diverged")
            alpha, beta, f = a_new, b_new, f_new
            if trace is not None:
                trace.append(f)
            if math.sqrt(moved) < solver.tolerance:
                break
            step *= 2.0
    return alpha, beta


def kernel_primal_recover(alpha, beta: float, indices, points, labels,
                          prev: KernelHypothesis | None, tau: float, kernel: KernelSpec) -> KernelHypothesis:
    """Unit-norm expansion proportional to ``sum alpha_i y_i phi(x_i) + beta tau w_prev``."""
    alpha = np.asarray(alpha, dtype=float)
    coef = alpha * np.asarray(labels, dtype=float)
    idx = np.asarray(indices, dtype=np.int64)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if prev is not None and beta != 0.0:
        idx = np.concatenate([idx, prev.support_indices])
        pts = np.vstack([pts, prev.support_points])
        coef = np.concatenate([coef, beta * tau * prev.coefficients])
    return _normalized(idx, pts, coef, kernel)


def minimize_hinge_in_feature_ball(gram, rows, center, radius: float, y, tau: float,
                                   solver: SolverParams = SolverParams()) -> np.ndarray:
    """Feature-space twin of :func:`minimize_hinge_in_ball`.

    Vectors are coefficient arrays over a support with Gram matrix ``gram``;
    the sample is ``rows`` of that support. Every step, projection and
    best-iterate decision mirrors the explicit solver, so with the linear
    kernel both produce the same iterates up to rounding.
    """
    if radius <= 0:
        raise ConfigurationError("radius must be positive")
    if tau <= 0:
        raise ConfigurationError("tau must be positive")
    y = np.asarray(y, dtype=float)
    rows = np.asarray(rows, dtype=np.int64)
    if len(y) == 0:
        raise ConfigurationError("hinge loss of an empty sample")
    m = len(y)
    center = np.asarray(center, dtype=float)

    def loss_grad(c):
        margins = y * (gram[rows] @ c) / tau
        active = margins < 1.0
        g = np.zeros_like(c)
        np.add.at(g, rows[active], -y[active] / (tau * m))
        return float(np.sum(1.0 - margins[active]) / m), g

    def fnorm(v):
        return math.sqrt(max(float(v @ gram @ v), 0.0))

    c = center.copy()
    best_c, (best, g) = c, loss_grad(c)
    loss = best
    for t in range(1, solver.max_iterations + 1):
        if not np.isfinite(loss):
            raise NumericalError("hinge loss diverged")
        gnorm = fnorm(g)
        if gnorm == 0.0:
            break
        step = solver.step_size * radius / math.sqrt(t)
        if step < solver.tolerance:
            break
        c = c - step * g / gnorm
        dist = fnorm(c - center)
        if dist > radius:
            c = center + (c - center) * (radius / dist)
        loss, g = loss_grad(c)
        if loss < best:
            best, best_c = loss, c
    return best_c


def initial_kernel_hypothesis(oracle: LabelOracle, positions, m0: int, kernel: KernelSpec,
                              seed: SeedLike = None,
                              solver: SolverParams = SolverParams()) -> KernelHypothesis:
    """Hinge minimizer (``tau = 1``) over the feature-space unit ball on ``m0`` random sensors."""
    if m0 < 1:
        raise ConfigurationError("the initial sample needs at least one label")
    positions = np.asarray(positions, dtype=float)
    rng = as_rng(seed)
    idx = _uniform_indices(len(positions), m0, rng)
    y = oracle.query_many(idx)
    X = positions[idx]
    c = minimize_hinge_in_feature_ball(kernel(X, X), np.arange(len(idx)), np.zeros(len(idx)),
                                       1.0, y, 1.0, solver)
    return _normalized(idx, X, c, kernel)


def kernel_round_primal(prev: KernelHypothesis, indices, X, y, tau: float, radius: float,
                        solver: SolverParams = SolverParams()) -> KernelHypothesis:
    """Minimize the scaled hinge within ``radius`` of ``prev`` in feature space."""
    kernel = prev.kernel
    X = np.atleast_2d(np.asarray(X, dtype=float))
    pts = np.vstack([prev.support_points, X])
    idx = np.concatenate([prev.support_indices, np.asarray(indices, dtype=np.int64)])
    n_prev = len(prev.coefficients)
    center = np.concatenate([prev.coefficients, np.zeros(len(X))])
    rows = n_prev + np.arange(len(X))
    c = minimize_hinge_in_feature_ball(kernel(pts, pts), rows, center, radius, y, tau, solver)
    return _normalized(idx, pts, c, kernel)


def kernel_round_dual(prev: KernelHypothesis, indices, X, y, tau: float, radius: float,
                      solver: SolverParams = SolverParams()) -> KernelHypothesis:
    """Dual solve on the band sample followed by primal recovery.

    When the unit-norm constraint is slack at the optimum the dual optimum
    encodes the zero vector and fixes no direction; the round then falls
    back to :func:`kernel_round_primal`. A ``prev`` with zero loss is kept.
    """
    kernel = prev.kernel
    prev_values = prev.decision(X)
    y = np.asarray(y, dtype=float)
    if np.all(y * prev_values >= tau):
        return prev
    gram = kernel(X, X)
    alpha, beta = kernel_dual_solve(gram, y, prev_values, tau, radius, solver)
    if DualObjective(gram, y, prev_values, tau, radius).norm(alpha, beta) > 1e-4 * tau:
        return kernel_primal_recover(alpha, beta, indices, X, y, prev, tau, kernel)
    return kernel_round_primal(prev, indices, X, y, tau, radius, solver)


ROUND_METHODS = {"primal": kernel_round_primal, "dual": kernel_round_dual}


def kernel_active_learn(oracle: LabelOracle, positions, config: ActiveConfig,
                        kernel: KernelSpec = GaussianKernel(), seed: SeedLike = None,
                        history: list | None = None, method: str = "primal") -> KernelHypothesis:
    """Localized active learning with bands ``|f_k(x)| <= b_k`` on the current expansion."""
    if method not in ROUND_METHODS:
        raise ConfigurationError(f"unknown round method {method!r}")
    update = ROUND_METHODS[method]
    positions = np.asarray(positions, dtype=float)
    if oracle.budget < config.label_cost:
        raise ConfigurationError(f"budget {oracle.budget} below the configured cost {config.label_cost}")
    rng = as_rng(seed)
    h = initial_kernel_hypothesis(oracle, positions, config.initial_sample, kernel, rng, config.solver)
    if history is not None:
        history.append(h)
    for k in range(1, config.rounds + 1):
        idx, _ = band_indices(h.decision(positions), config.band(k))
        pick = idx[_uniform_indices(idx.size, config.labels_per_round, rng)]
        y = oracle.query_many(pick)
        h = update(h, pick, positions[pick], y, config.tau(k), config.radius(k), config.solver)
        if history is not None:
            history.append(h)
    return h


def fit_kernel_regularized_hinge(X, y, reg: float, kernel: KernelSpec,
                                 iterations: int = 2000) -> np.ndarray:
    """Coefficients minimizing ``reg ||f||^2 + mean hinge`` with ``f = sum c_j k(x_j, .)``.

    Full-batch kernelized Pegasos steps with the ``1 / sqrt(reg)`` norm cap;
    the best objective seen is kept.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    if len(y) == 0:
        raise ConfigurationError("cannot fit an empty sample")
    if reg <= 0:
        raise ConfigurationError("regularization must be positive")
    K = kernel(X, X)
    n = len(y)
    cap = 1.0 / math.sqrt(reg)
    c = np.zeros(n)

    def objective(c):
        f = K @ c
        return reg * float(c @ f) + float(np.mean(np.maximum(0.0, 1.0 - y * f)))

    best_c, best = c, objective(c)
    for t in range(1, iterations + 1):
        viol = y * (K @ c) < 1.0
        c = (1.0 - 1.0 / t) * c + np.where(viol, y, 0.0) / (reg * t * n)
        norm = math.sqrt(max(float(c @ K @ c), 0.0))
        if norm > cap:
            c = c * (cap / norm)
        obj = objective(c)
        if obj < best:
            best, best_c = obj, c
    return best_c


def kernel_passive_baseline(oracle: LabelOracle, positions, budget: int, kernel: KernelSpec,
                            evaluation: Callable[[KernelHypothesis], float],
                            reg_grid: Sequence[float] = (1e-4, 1e-3, 1e-2, 1e-1, 1.0),
                            seed: SeedLike = None, iterations: int = 2000) -> KernelHypothesis:
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
        c = fit_kernel_regularized_hinge(X, y, reg, kernel, iterations)
        try:
            h = _normalized(idx, X, c, kernel)
        except DegenerateSolutionError:
            continue
        score = evaluation(h)
        if score < best_score:
            best_h, best_score = h, score
    if best_h is None:
        raise DegenerateSolutionError("every regularization level produced a zero expansion")
    return best_h
