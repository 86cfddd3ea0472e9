"""Experiment runners behind the CLI.

Every trial draws its randomness from children of the master seed, addressed
by fixed keys rather than by spawn order, so a trial's output does not depend
on which other trials, conditions or budgets are run alongside it.
"""

from __future__ import annotations

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from ..dynamics import Conservative, Majority, run, schedule_from_name
from ..errors import ConfigurationError
from ..field import (
    FLOAT_FMT,
    LinearTarget,
    SineTarget,
    corrupt_pockets,
    corrupt_random,
    make_field,
    random_linear_target,
    sample_unit_ball,
)
from ..graph import build_graph
from ..learner.kernel import (
    KernelHypothesis,
    LinearKernel,
    kernel_active_learn,
    kernel_from_name,
    kernel_passive_baseline,
)
from ..learner.linear import ActiveConfig, LinearHypothesis, active_learn
from ..learner.oracle import LabelOracle
from ..learner.passive import passive_baseline
from ..metrics import angle_error, empirical_error, noise_rate
from .config import ExperimentConfig

CONDITIONS = ("active_pre", "passive_pre", "active_post", "passive_post")

# fixed child keys inside a trial's seed tree
_POSITIONS, _TARGET, _NOISE, _SCHEDULE, _RULE, _LEARNER, _TEST = range(7)


def child_seed(root: np.random.SeedSequence, *keys: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(root.entropy, spawn_key=tuple(root.spawn_key) + tuple(keys))


def trial_seed(config: ExperimentConfig, trial: int) -> np.random.SeedSequence:
    return child_seed(np.random.SeedSequence(config.seed), trial)


def fmt(x: float) -> str:
    return format(float(x), FLOAT_FMT)


def _map_trials(fn: Callable, config: ExperimentConfig) -> list:
    args = [(config, t) for t in range(config.trials)]
    if config.workers == 1 or config.trials == 1:
        return [fn(*a) for a in args]
    with ProcessPoolExecutor(max_workers=min(config.workers, os.cpu_count() or 1)) as pool:
        return list(pool.map(fn, *zip(*args)))


def make_target(config: ExperimentConfig, seed):
    if config.target == "sine":
        return SineTarget(config.amplitude, config.frequency)
    return random_linear_target(config.dimension, seed)


def make_rule(config: ExperimentConfig, seed):
    if config.rule == "conservative":
        return Conservative(config.direction_budget, seed)
    return Majority()


def corrupt(config: ExperimentConfig, field, graph, eta: float, seed):
    if config.noise_model == "pockets":
        return corrupt_pockets(field, graph, eta, seed)
    return corrupt_random(field, eta, seed)


def _writer(path: Path, header: Iterable[str]):
    fh = open(path, "w", newline="")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(list(header))
    return fh, w


def _prepare_out(out_dir) -> Path:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from None
    if not os.access(out, os.W_OK):
        raise OSError(f"output directory {out} is not writable")
    return out


# --- denoising curves --------------------------------------------------------

def denoise_trial(config: ExperimentConfig, trial: int) -> list[list[float]]:
    """Noise trajectory for every initial eta of one trial."""
    ss = trial_seed(config, trial)
    X = sample_unit_ball(config.n_sensors, config.dimension, child_seed(ss, _POSITIONS))
    target = make_target(config, child_seed(ss, _TARGET))
    field = make_field(X, target)
    graph = build_graph(X, config.radius)
    out = []
    for k, eta in enumerate(config.eta_grid):
        noisy = corrupt(config, field, graph, eta, child_seed(ss, _NOISE, k))
        schedule = schedule_from_name(config.schedule, child_seed(ss, _SCHEDULE, k))
        traj = run(noisy, graph, make_rule(config, child_seed(ss, _RULE, k)), schedule, config.rounds)
        out.append(traj.noise_rates)
    return out


def cmd_denoise(config: ExperimentConfig, out_dir=None) -> dict[str, Path]:
    """Write ``denoise.csv`` (per round) and ``denoise_summary.csv`` (mean final noise)."""
    if not config.eta_grid:
        raise ConfigurationError("eta_grid is empty")
    out = _prepare_out(out_dir or config.output_dir)
    results = _map_trials(denoise_trial, config)
    paths = {"trajectories": out / "denoise.csv", "summary": out / "denoise_summary.csv"}
    fh, w = _writer(paths["trajectories"], ["eta_initial", "trial", "round", "noise_rate"])
    with fh:
        for k, eta in enumerate(config.eta_grid):
            for t, per_eta in enumerate(results):
                for rnd, rate in enumerate(per_eta[k]):
                    w.writerow([fmt(eta), t, rnd, fmt(rate)])
    fh, w = _writer(paths["summary"], ["eta_initial", "mean_final_noise"])
    with fh:
        for k, eta in enumerate(config.eta_grid):
            finals = [per_eta[k][-1] for per_eta in results]
            w.writerow([fmt(eta), fmt(np.mean(finals))])
    return paths


# --- learning curves ---------------------------------------------------------

@dataclass(frozen=True)
class LearnRecord:
    condition: str
    budget: int
    trial: int
    error: float
    labels_used: int


def evaluate(h, target, config: ExperimentConfig, seed) -> float:
    """Angle error when both sides are linear, otherwise error on fresh samples."""
    if isinstance(target, LinearTarget):
        if isinstance(h, LinearHypothesis):
            return angle_error(h, target.weight)
        if isinstance(h, KernelHypothesis) and isinstance(h.kernel, LinearKernel):
            w = h.linear_weight()
            return angle_error(w / np.linalg.norm(w), target.weight)
    return empirical_error(h, target, config.n_test, seed)


def _active_config(config: ExperimentConfig, budget: int) -> ActiveConfig:
    return ActiveConfig.for_budget(budget, config.dimension, config.max_rounds,
                                   band_constant=config.band_constant,
                                   radius_constant=config.radius_constant,
                                   hinge_scale_constant=config.hinge_scale_constant)


def learn_trial(config: ExperimentConfig, trial: int) -> tuple[list[LearnRecord], float, float]:
    ss = trial_seed(config, trial)
    X = sample_unit_ball(config.n_sensors, config.dimension, child_seed(ss, _POSITIONS))
    target = make_target(config, child_seed(ss, _TARGET))
    field = make_field(X, target)
    graph = build_graph(X, config.radius)
    noisy = corrupt(config, field, graph, config.eta, child_seed(ss, _NOISE))
    schedule = schedule_from_name(config.schedule, child_seed(ss, _SCHEDULE))
    traj = run(noisy, graph, make_rule(config, child_seed(ss, _RULE)), schedule, config.rounds)
    denoised = noisy.with_labels(traj.final_labels)
    label_sets = {"pre": noisy.current_labels, "post": denoised.current_labels}
    kernel = None if config.kernel == "none" else kernel_from_name(config.kernel, config.bandwidth)
    test_seed = child_seed(ss, _TEST)

    def score(h):
        return evaluate(h, target, config, test_seed)

    records = []
    for bi, budget in enumerate(config.budgets):
        for condition in CONDITIONS:
            learner, stage = condition.split("_")
            # pre and post share learner seeds so the comparison is paired
            seed = child_seed(ss, _LEARNER, bi, 0 if learner == "active" else 1)
            oracle = LabelOracle(label_sets[stage], budget)
            if learner == "active":
                acfg = _active_config(config, budget)
                if kernel is None:
                    h = active_learn(oracle, X, acfg, seed)
                else:
                    h = kernel_active_learn(oracle, X, acfg, kernel, seed)
            elif kernel is None:
                h = passive_baseline(oracle, X, budget, score, config.reg_grid, seed)
            else:
                h = kernel_passive_baseline(oracle, X, budget, kernel, score, config.reg_grid, seed)
            records.append(LearnRecord(condition, budget, trial, score(h), oracle.used))
    return records, noise_rate(noisy), noise_rate(denoised)


def _write_learn(out: Path, prefix: str, config: ExperimentConfig, results) -> dict[str, Path]:
    paths = {
        "errors": out / f"{prefix}.csv",
        "means": out / f"{prefix}_means.csv",
        "queries": out / f"{prefix}_queries.csv",
        "noise": out / f"{prefix}_noise.csv",
    }
    records = [r for recs, _, _ in results for r in recs]
    order = {c: i for i, c in enumerate(CONDITIONS)}
    records.sort(key=lambda r: (order[r.condition], r.budget, r.trial))
    fh, w = _writer(paths["errors"], ["condition", "budget", "trial", "error"])
    with fh:
        for r in records:
            w.writerow([r.condition, r.budget, r.trial, fmt(r.error)])
    fh, w = _writer(paths["queries"], ["condition", "budget", "trial", "labels_used"])
    with fh:
        for r in records:
            w.writerow([r.condition, r.budget, r.trial, r.labels_used])
    fh, w = _writer(paths["means"], ["condition", "budget", "mean_error", "std_error"])
    with fh:
        for condition in CONDITIONS:
            for budget in config.budgets:
                errs = np.array([r.error for r in records if r.condition == condition and r.budget == budget])
                std = errs.std(ddof=1) if errs.size > 1 else 0.0
                w.writerow([condition, budget, fmt(errs.mean()), fmt(std)])
    fh, w = _writer(paths["noise"], ["trial", "noise_pre", "noise_post"])
    with fh:
        for t, (_, pre, post) in enumerate(results):
            w.writerow([t, fmt(pre), fmt(post)])
    return paths


def cmd_learn(config: ExperimentConfig, out_dir=None) -> dict[str, Path]:
    """Learning curves for active and passive learners before and after denoising."""
    if not config.budgets:
        raise ConfigurationError("budgets is empty")
    out = _prepare_out(out_dir or config.output_dir)
    results = _map_trials(learn_trial, config)
    return _write_learn(out, "learn", config, results)


def read_means(path) -> dict[tuple[str, int], float]:
    with open(path, newline="") as fh:
        return {(row["condition"], int(row["budget"])): float(row["mean_error"])
                for row in csv.DictReader(fh)}


def cmd_sweep(config: ExperimentConfig, out_dir=None) -> dict[str, Path]:
    """Run the learning experiment at every value of ``sweep_param``."""
    if not config.sweep_values:
        raise ConfigurationError("sweep_values is empty")
    out = _prepare_out(out_dir or config.output_dir)
    param = config.sweep_param
    summary_rows, noise_rows = [], []
    for value in config.sweep_values:
        sub = config.replace(**{param: int(value) if param == "n_sensors" else float(value)})
        label = str(int(value)) if param == "n_sensors" else fmt(value)
        paths = cmd_learn(sub, out / f"{param}_{label}")
        for (condition, budget), mean in read_means(paths["means"]).items():
            summary_rows.append([param, label, condition, budget, fmt(mean)])
        with open(paths["noise"], newline="") as fh:
            rows = list(csv.DictReader(fh))
        noise_rows.append([param, label,
                           fmt(np.mean([float(r["noise_pre"]) for r in rows])),
                           fmt(np.mean([float(r["noise_post"]) for r in rows]))])
    result = {"summary": out / "sweep_summary.csv", "noise": out / "sweep_noise.csv"}
    fh, w = _writer(result["summary"], ["param", "value", "condition", "budget", "mean_error"])
    with fh:
        w.writerows(summary_rows)
    fh, w = _writer(result["noise"], ["param", "value", "mean_noise_pre", "mean_noise_post"])
    with fh:
        w.writerows(noise_rows)
    return result
