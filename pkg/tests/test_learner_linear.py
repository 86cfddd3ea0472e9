import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from sensordenoise.dynamics import run
from sensordenoise.errors import BudgetExceededError, ConfigurationError, EmptyBandError
from sensordenoise.field import corrupt_random, make_field, random_linear_target, sample_unit_ball
from sensordenoise.graph import build_graph
from sensordenoise.learner.linear import (
    ActiveConfig,
    LinearHypothesis,
    SolverParams,
    active_learn,
    band_indices,
    hinge_loss,
    initial_hypothesis,
    minimize_hinge_in_ball,
    solve_constrained,
)
from sensordenoise.learner.oracle import LabelOracle
from sensordenoise.metrics import angle_error


# --- oracle ------------------------------------------------------------------

def test_oracle_single_query():
    o = LabelOracle(np.array([1, -1], np.int8), 1)
    assert o.query(1) == -1 and o.budget == 0 and o.log == [(1, -1)]
    with pytest.raises(BudgetExceededError):
        o.query(0)


def test_oracle_zero_budget_and_range():
    with pytest.raises(BudgetExceededError):
        LabelOracle(np.array([1], np.int8), 0).query(0)
    with pytest.raises(IndexError):
        LabelOracle(np.array([1], np.int8), 3).query(4)
    with pytest.raises(ConfigurationError):
        LabelOracle(np.array([1], np.int8), -1)


def test_oracle_repeat_queries_cost():
    o = LabelOracle(np.array([1, -1, 1], np.int8), 5)
    o.query_many([0, 0, 2])
    assert o.used == 3 and o.budget == 2
    with pytest.raises(BudgetExceededError):
        o.query_many([1, 1, 1])
    assert o.used == 3


def test_oracle_on_denoised_field():
    good = 0
    for s in range(20):
        ss = np.random.SeedSequence(s).spawn(4)
        X = sample_unit_ball(10000, 2, ss[0])
        f = corrupt_random(make_field(X, random_linear_target(2, ss[1])), 0.35, ss[2])
        labels = run(f, build_graph(X, 0.1), rounds=100).final_labels
        idx = np.random.default_rng(ss[3]).choice(10000, 100, replace=False)
        o = LabelOracle(labels, 100)
        good += np.sum(o.query_many(idx) != f.true_labels[idx]) <= 10
    assert good >= 18


# --- hinge -------------------------------------------------------------------

def test_hinge_outside_margin():
    X = np.array([[1.0, 0.0], [-1.0, 0.0]])
    value, grad = hinge_loss(np.array([1.0, 0.0]), X, np.array([1, -1]), tau=0.5)
    assert value == 0.0 and np.all(grad == 0)


def test_hinge_at_zero_weight():
    X = sample_unit_ball(7, 3, 0)
    assert hinge_loss(np.zeros(3), X, np.ones(7), 0.3)[0] == 1.0


def test_hinge_errors():
    with pytest.raises(ConfigurationError):
        hinge_loss(np.zeros(2), np.zeros((0, 2)), np.zeros(0))
    with pytest.raises(ConfigurationError):
        hinge_loss(np.zeros(2), np.zeros((1, 2)), np.ones(1), tau=0.0)


@given(st.integers(0, 2**31), st.integers(1, 5), st.floats(0.05, 2.0))
def test_hinge_subgradient_matches_finite_differences(seed, d, tau):
    rng = np.random.default_rng(seed)
    X = sample_unit_ball(20, d, rng)
    y = rng.choice([-1.0, 1.0], 20)
    w = rng.standard_normal(d)
    h = 1e-7
    margins = y * (X @ w) / tau
    # stay away from kinks so the central difference sees a single linear piece
    assume(np.min(np.abs(margins - 1.0)) > 1e-4)
    _, grad = hinge_loss(w, X, y, tau)
    fd = np.array([(hinge_loss(w + h * e, X, y, tau)[0] - hinge_loss(w - h * e, X, y, tau)[0]) / (2 * h)
                   for e in np.eye(d)])
    assert np.allclose(grad, fd, rtol=1e-5, atol=1e-5 * max(1.0, np.abs(fd).max()))


def test_hinge_subgradient_100_points():
    rng = np.random.default_rng(1)
    checked = 0
    while checked < 100:
        X = sample_unit_ball(20, 3, rng)
        y = rng.choice([-1.0, 1.0], 20)
        w = rng.standard_normal(3)
        if np.min(np.abs(y * (X @ w) / 0.1 - 1.0)) < 1e-4:
            continue
        _, grad = hinge_loss(w, X, y, 0.1)
        fd = np.array([(hinge_loss(w + 1e-7 * e, X, y, 0.1)[0] - hinge_loss(w - 1e-7 * e, X, y, 0.1)[0]) / 2e-7
                       for e in np.eye(3)])
        assert np.allclose(grad, fd, rtol=1e-5, atol=1e-5 * np.abs(fd).max())
        checked += 1


# --- constrained solve ---------------------------------------------------------

def test_solve_keeps_perfect_prev():
    w = LinearHypothesis(np.array([0.6, 0.8]))
    X = np.array([[0.6, 0.8], [-0.6, -0.8], [0.8, 0.6]])
    y = np.array([1, -1, 1])
    out = solve_constrained(w, X, y, tau=0.1, radius=0.5)
    assert np.array_equal(out.weight, w.weight)


def test_solve_degenerate_radius():
    w = LinearHypothesis(np.array([1.0, 0.0]))
    X = sample_unit_ball(30, 2, 0)
    y = np.where(X[:, 1] > 0, 1, -1)
    assert np.allclose(solve_constrained(w, X, y, 0.1, 1e-12).weight, w.weight, atol=1e-11)


@given(st.integers(0, 2**31), st.floats(0.01, 1.0))
def test_solver_respects_ball(seed, radius):
    rng = np.random.default_rng(seed)
    X = sample_unit_ball(25, 3, rng)
    y = rng.choice([-1, 1], 25)
    c = random_linear_target(3, rng).weight
    v, _ = minimize_hinge_in_ball(c, radius, X, y, 0.2)
    assert np.linalg.norm(v - c) <= radius + 1e-9


def test_solver_matches_random_search():
    rng = np.random.default_rng(7)
    for _ in range(3):
        X = sample_unit_ball(40, 2, rng)
        w_true = random_linear_target(2, rng).weight
        y = np.where(X @ w_true >= 0, 1, -1) * np.where(rng.random(40) < 0.15, -1, 1)
        c = random_linear_target(2, rng).weight
        radius, tau = 0.5, 0.2
        _, found = minimize_hinge_in_ball(c, radius, X, y, tau, SolverParams(max_iterations=2000))
        # 10^6 uniform feasible points of the disk around c
        P = c + radius * sample_unit_ball(10**6, 2, rng)
        margins = (y[:, None] * (X @ P.T)) / tau
        best = np.maximum(0.0, 1.0 - margins).mean(axis=0).min()
        assert found <= best * 1.02 + 1e-12


# --- initial hypothesis and active learning -------------------------------------

def test_initial_hypothesis_mean_direction():
    rng = np.random.default_rng(3)
    X = sample_unit_ball(2000, 2, rng)
    X = X[X @ np.array([1.0, 1.0]) > 0.3]
    o = LabelOracle(np.ones(len(X), np.int8), 40)
    h = initial_hypothesis(o, X, 40, rng)
    mean = X.mean(axis=0) / np.linalg.norm(X.mean(axis=0))
    assert np.degrees(np.arccos(np.clip(h.weight @ mean, -1, 1))) < 30


def test_initial_hypothesis_is_normalized_label_mean():
    X = sample_unit_ball(20, 3, 5)
    y = np.where(X[:, 0] > 0, 1, -1).astype(np.int8)
    h = initial_hypothesis(LabelOracle(y, 20), X, 20, 0)
    v = (y[:, None] * X).sum(axis=0)
    assert np.allclose(h.weight, v / np.linalg.norm(v), atol=1e-6)


def test_initial_hypothesis_clean_m0_20():
    hits = 0
    for s in range(20):
        X = sample_unit_ball(10000, 2, s)
        t = random_linear_target(2, s + 50)
        h = initial_hypothesis(LabelOracle(t.labels(X), 20), X, 20, s)
        hits += angle_error(h, t.weight) < 1 / 6
    assert hits >= 18


def test_initial_hypothesis_errors():
    with pytest.raises(ConfigurationError):
        initial_hypothesis(LabelOracle(np.ones(5, np.int8), 5), np.zeros((5, 2)), 0)
    with pytest.raises(BudgetExceededError):
        initial_hypothesis(LabelOracle(np.ones(5, np.int8), 2), sample_unit_ball(5, 2, 0), 3)


def test_schedules_halve():
    cfg = ActiveConfig(rounds=5, labels_per_round=3, initial_sample=4)
    for k in range(1, 5):
        assert cfg.band(k + 1) == cfg.band(k) / 2
        assert cfg.radius(k + 1) == cfg.radius(k) / 2
        assert cfg.tau(k + 1) == cfg.tau(k) / 2
    assert (cfg.band(1), cfg.radius(1), cfg.tau(1)) == (0.5, 0.5, 0.1)


def test_config_validation_and_defaults():
    d = ActiveConfig.default(3)
    assert d.labels_per_round == 45 and d.initial_sample == 45
    for bad in (dict(rounds=-1), dict(labels_per_round=0), dict(band_constant=0.0)):
        kw = dict(rounds=1, labels_per_round=1, initial_sample=1) | bad
        with pytest.raises(ConfigurationError):
            ActiveConfig(**kw)
    with pytest.raises(ConfigurationError):
        SolverParams(max_iterations=0)


@given(st.integers(2, 200), st.integers(1, 4))
def test_for_budget_spends_exactly(budget, d):
    assert ActiveConfig.for_budget(budget, d).label_cost == budget


def test_active_learn_clean_labels():
    X = sample_unit_ball(10000, 2, 1)
    t = random_linear_target(2, 2)
    h = active_learn(LabelOracle(t.labels(X), 100), X, ActiveConfig.for_budget(100, 2), 3)
    assert angle_error(h, t.weight) < 0.05


def test_active_learn_rounds_zero_is_initial():
    X = sample_unit_ball(1000, 2, 1)
    y = random_linear_target(2, 2).labels(X)
    cfg = ActiveConfig(rounds=0, labels_per_round=5, initial_sample=12)
    h = active_learn(LabelOracle(y, 12), X, cfg, 4)
    h0 = initial_hypothesis(LabelOracle(y, 12), X, 12, 4)
    assert np.array_equal(h.weight, h0.weight)


@given(st.integers(0, 2**31))
def test_active_learn_query_accounting(seed):
    X = sample_unit_ball(3000, 2, seed)
    y = random_linear_target(2, seed).labels(X)
    cfg = ActiveConfig(rounds=4, labels_per_round=6, initial_sample=8)
    o = LabelOracle(y, 100)
    hist = []
    h = active_learn(o, X, cfg, seed, hist)
    assert o.used == 8 + 4 * 6 and len(hist) == 5 and hist[-1] is h
    assert all(label == y[i] for i, label in o.log)
    # every round-k query lies in the (possibly widened) band of w_k
    for k in range(1, 5):
        queried = np.array([i for i, _ in o.log[8 + 6 * (k - 1): 8 + 6 * k]])
        assert np.all(np.abs(X[queried] @ hist[k - 1].weight) <= cfg.band(k) * 2 ** 4)


def test_active_learn_budget_check():
    X = sample_unit_ball(100, 2, 0)
    with pytest.raises(ConfigurationError):
        active_learn(LabelOracle(np.ones(100, np.int8), 5), X,
                     ActiveConfig(rounds=1, labels_per_round=3, initial_sample=3), 0)


def test_band_widening_and_empty():
    margins = np.array([0.5, -0.9, 1.7])
    idx, width = band_indices(margins, 0.1)
    assert list(idx) == [0] and width == 0.8
    with pytest.raises(EmptyBandError):
        band_indices(np.array([5.0]), 0.1)
