"""Best-response denoising dynamics on the neighbor graph.

Two update rules are provided: plain strict-majority best response and the
conservative rule, which only flips a sensor when every sufficiently balanced
hyperplane through it shows the same majority on both sides. Rules are run
either synchronously or one sensor at a time under a schedule.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field as dc_field
from typing import Sequence, Union

import numpy as np

from ._kernels import async_majority
from .errors import ConfigurationError, DimensionMismatchError, UnsupportedTargetError
from .field import FLOAT_FMT, LinearTarget, SeedLike, SensorField, as_rng
from .graph import NeighborGraph


# --- schedules ---------------------------------------------------------------

@dataclass(frozen=True)
class Synchronous:
    pass


@dataclass(frozen=True)
class RandomPermutationPerRound:
    seed: SeedLike = None


@dataclass(frozen=True)
class GivenSequence:
    indices: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        if not self.indices:
            raise ConfigurationError("a given update sequence must not be empty")


@dataclass(frozen=True)
class AdversarialSweep:
    pass


UpdateSchedule = Union[Synchronous, RandomPermutationPerRound, GivenSequence, AdversarialSweep]


# --- rules -------------------------------------------------------------------

@dataclass(frozen=True)
class Majority:
    pass


@dataclass(frozen=True)
class Conservative:
    """Conservative best response.

    ``direction_budget`` hyperplane normals are sampled per update when
    ``d >= 3``; in the plane the rule is evaluated exactly.
    """

    direction_budget: int = 64
    seed: SeedLike = 0

    def __post_init__(self):
        if self.direction_budget < 1:
            raise ConfigurationError("direction_budget must be >= 1")


DynamicsRule = Union[Majority, Conservative]


@dataclass
class Trajectory:
    noise_rates: list[float]
    flips: list[int]
    final_labels: np.ndarray
    incorrect_flips: list[int] = dc_field(default_factory=list)

    @property
    def rounds(self) -> int:
        return len(self.noise_rates) - 1

    @property
    def final_noise_rate(self) -> float:
        return self.noise_rates[-1]


# --- majority ----------------------------------------------------------------

def majority_step_synchronous(graph: NeighborGraph, labels) -> np.ndarray:
    """One simultaneous strict-majority update; ties and isolated sensors keep their label."""
    labels = np.asarray(labels)
    if labels.shape != (graph.n,):
        raise DimensionMismatchError(f"expected {graph.n} labels, got shape {labels.shape}")
    sums = graph.neighbor_sums(labels)
    return np.where(sums > 0, 1, np.where(sums < 0, -1, labels)).astype(np.int8)


def majority_update_async(graph: NeighborGraph, labels: np.ndarray, i: int) -> bool:
    nb = graph.neighbors(i)
    s = int(labels[nb].astype(np.int64).sum())
    if s == 0:
        return False
    new = 1 if s > 0 else -1
    if labels[i] == new:
        return False
    labels[i] = new
    return True


def adversarial_order(field: SensorField) -> np.ndarray:
    """Sensors sorted by ascending projection on the target normal, ties by index."""
    if not isinstance(field.target, LinearTarget):
        raise UnsupportedTargetError("the adversarial sweep needs a linear target")
    proj = field.positions @ field.target.weight
    return np.argsort(proj, kind="stable")


# --- conservative ------------------------------------------------------------

def _balanced(counts_left: np.ndarray, m: int) -> np.ndarray:
    # a side qualifies when it holds at least a quarter of the neighborhood
    return (4 * counts_left >= m) & (4 * (m - counts_left) >= m)


def _verdict(left_count, left_sum, m: int, total: int) -> int:
    right_sum = total - left_sum
    ok = _balanced(left_count, m)
    if not ok.any():
        return 0
    ls, rs = left_sum[ok], right_sum[ok]
    if np.all((ls > 0) & (rs > 0)):
        return 1
    if np.all((ls < 0) & (rs < 0)):
        return -1
    return 0


def planar_splits(offsets: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Every distinct two-sided split of planar neighbors by a line through the origin.

    Returns ``(left_count, left_label_sum)`` per split. Lines are swept over
    one half turn; a neighbor changes side exactly when the line passes its
    direction, so counts are prefix sums over neighbors sorted by angle mod pi.
    """
    ang = np.arctan2(offsets[:, 1], offsets[:, 0])
    psi = np.mod(ang, np.pi)
    order = np.argsort(psi, kind="stable")
    psi_s = psi[order]
    # start in the gap that wraps around pi
    theta0 = 0.5 * (psi_s[-1] - np.pi + psi_s[0])
    in_left = np.sin(ang - theta0) > 0
    lab = labels.astype(np.int64)
    c0 = int(in_left.sum())
    s0 = int(lab[in_left].sum())
    step = np.where(in_left[order], -1, 1)
    counts = c0 + np.cumsum(step)
    sums = s0 + np.cumsum(step * lab[order])
    # evaluate only once all neighbors sharing a direction have switched;
    # the final state mirrors the starting line and is skipped
    group_end = np.flatnonzero(psi_s[:-1] < psi_s[1:])
    return (np.concatenate([[c0], counts[group_end]]),
            np.concatenate([[s0], sums[group_end]]))


def conservative_target(offsets: np.ndarray, labels: np.ndarray,
                        direction_budget: int = 64, rng: np.random.Generator | None = None) -> int:
    """Label the conservative rule moves to: +1, -1, or 0 for "stay"."""
    m, d = offsets.shape
    if m == 0:
        return 0
    total = int(labels.astype(np.int64).sum())
    if d == 1:
        left = offsets[:, 0] > 0
        return _verdict(np.array([left.sum()]), np.array([labels[left].astype(np.int64).sum()]), m, total)
    if d == 2:
        counts, sums = planar_splits(offsets, labels)
        return _verdict(counts, sums, m, total)
    rng = rng if rng is not None else np.random.default_rng(0)
    normals = rng.standard_normal((direction_budget, d))
    side = (offsets @ normals.T) > 0
    counts = side.sum(axis=0)
    sums = labels.astype(np.int64) @ side
    return _verdict(counts, sums, m, total)


def conservative_update(graph: NeighborGraph, positions: np.ndarray, labels: np.ndarray, i: int,
                        direction_budget: int = 64, rng: np.random.Generator | None = None) -> bool:
    nb = graph.neighbors(i)
    if nb.size == 0:
        return False
    nb_labels = labels[nb]
    s = int(nb_labels.astype(np.int64).sum())
    # moving to a label requires that label's strict majority over all neighbors
    if s == 0 or (s > 0) == (labels[i] > 0):
        return False
    new = conservative_target(positions[nb] - positions[i], nb_labels, direction_budget, rng)
    if new == 0 or new == labels[i]:
        return False
    labels[i] = new
    return True


def conservative_step_synchronous(graph: NeighborGraph, positions: np.ndarray, labels,
                                  direction_budget: int = 64,
                                  rng: np.random.Generator | None = None) -> np.ndarray:
    old = np.asarray(labels, dtype=np.int8)
    new = old.copy()
    sums = graph.neighbor_sums(old)
    # only sensors disagreeing with their overall majority can move
    for i in np.flatnonzero((sums != 0) & ((sums > 0) != (old > 0))):
        nb = graph.neighbors(i)
        t = conservative_target(positions[nb] - positions[i], old[nb], direction_budget, rng)
        if t != 0:
            new[i] = t
    return new


# --- runner ------------------------------------------------------------------

def _sequence_source(field: SensorField, schedule: UpdateSchedule):
    n = field.n
    if isinstance(schedule, RandomPermutationPerRound):
        rng = as_rng(schedule.seed)
        while True:
            yield rng.permutation(n), True
    elif isinstance(schedule, AdversarialSweep):
        order = adversarial_order(field)
        while True:
            yield order, True
    elif isinstance(schedule, GivenSequence):
        seq = np.asarray(schedule.indices, dtype=np.int64)
        if seq.min() < 0 or seq.max() >= n:
            raise ConfigurationError("given update sequence has out-of-range indices")
        pos = 0
        while True:
            take = (pos + np.arange(n)) % seq.size
            pos = (pos + n) % seq.size
            yield seq[take], False
    else:
        raise ConfigurationError(f"unknown schedule {schedule!r}")


def run(field: SensorField, graph: NeighborGraph, rule: DynamicsRule = Majority(),
        schedule: UpdateSchedule = Synchronous(), rounds: int = 1) -> Trajectory:
    """Run ``rounds`` rounds of dynamics from the field's current labels.

    A synchronous round is one simultaneous step; an asynchronous round is
    ``N`` single-sensor updates taken from the schedule.
    """
    if rounds < 0:
        raise ConfigurationError("rounds must be >= 0")
    if graph.n != field.n:
        raise ConfigurationError("graph and field sizes differ")
    truth = field.true_labels
    labels = field.current_labels.astype(np.int8).copy()
    n = max(field.n, 1)
    noise = [float(np.mean(labels != truth)) if field.n else 0.0]
    flips = [0]
    wrong = [0]
    conservative = isinstance(rule, Conservative)
    rng = as_rng(rule.seed) if conservative else None
    budget = rule.direction_budget if conservative else 0
    # majority dynamics are deterministic, so a quiet full pass is a fixed point
    can_settle = not conservative or field.dim <= 2

    def record(new_labels, n_flips, n_wrong):
        noise.append(float(np.mean(new_labels != truth)) if field.n else 0.0)
        flips.append(int(n_flips))
        wrong.append(int(n_wrong))

    if isinstance(schedule, Synchronous):
        for _ in range(rounds):
            if can_settle and len(flips) > 1 and flips[-1] == 0:
                record(labels, 0, 0)
                continue
            if conservative:
                new = conservative_step_synchronous(graph, field.positions, labels, budget, rng)
            else:
                new = majority_step_synchronous(graph, labels)
            changed = new != labels
            record(new, changed.sum(), (changed & (new != truth)).sum())
            labels = new
        return Trajectory(noise, flips, labels, wrong)

    source = _sequence_source(field, schedule)
    sums = graph.neighbor_sums(labels).astype(np.int64) if not conservative else None
    settled = False
    for _ in range(rounds):
        if settled:
            record(labels, 0, 0)
            continue
        seq, covers_all = next(source)
        if conservative:
            f = w = 0
            for i in seq:
                if conservative_update(graph, field.positions, labels, int(i), budget, rng):
                    f += 1
                    w += labels[i] != truth[i]
        else:
            f, w = async_majority(graph.indptr, graph.indices, labels, sums,
                                  np.ascontiguousarray(seq, dtype=np.int64), truth)
        record(labels, f, w)
        settled = can_settle and covers_all and f == 0
    return Trajectory(noise, flips, labels, wrong)


def write_trajectory_csv(traj: Trajectory, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["round", "noise_rate", "flips"])
        for k, (rate, f) in enumerate(zip(traj.noise_rates, traj.flips)):
            w.writerow([k, format(rate, FLOAT_FMT), f])


def distance_to_hyperplane(field: SensorField) -> np.ndarray:
    if not isinstance(field.target, LinearTarget):
        raise UnsupportedTargetError("distance is defined for linear targets only")
    return np.abs(field.positions @ field.target.weight)


def schedule_from_name(name: str, seed: SeedLike = None,
                       sequence: Sequence[int] | None = None) -> UpdateSchedule:
    name = name.strip().lower()
    if name in ("sync", "synchronous"):
        return Synchronous()
    if name in ("random", "async", "asynchronous"):
        return RandomPermutationPerRound(seed)
    if name in ("adversarial", "sweep"):
        return AdversarialSweep()
    if name in ("given", "sequence"):
        if sequence is None:
            raise ConfigurationError("the 'given' schedule needs an index sequence")
        return GivenSequence(tuple(sequence))
    raise ConfigurationError(f"unknown schedule {name!r}")
