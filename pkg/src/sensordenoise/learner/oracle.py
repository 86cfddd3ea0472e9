from __future__ import annotations

import numpy as np

from ..errors import BudgetExceededError, ConfigurationError


class LabelOracle:
    """Budgeted access to sensor labels.

    Learners read labels only through :meth:`query`; every call costs one
    unit of budget, including repeated queries of the same sensor.
    """

    def __init__(self, labels, budget: int):
        if budget < 0:
            raise ConfigurationError("budget must be >= 0")
        self._labels = np.asarray(labels, dtype=np.int8)
        self.initial_budget = int(budget)
        self.budget = int(budget)
        self.log: list[tuple[int, int]] = []

    @property
    def n(self) -> int:
        return len(self._labels)

    @property
    def used(self) -> int:
        return len(self.log)

    def query(self, i: int) -> int:
        if self.budget <= 0:
            raise BudgetExceededError(f"label budget of {self.initial_budget} exhausted")
        i = int(i)
        if not 0 <= i < self.n:
            raise IndexError(f"sensor index {i} out of range")
        label = int(self._labels[i])
        self.budget -= 1
        self.log.append((i, label))
        return label

    def query_many(self, indices) -> np.ndarray:
        indices = np.asarray(indices, dtype=np.int64)
        if len(indices) > self.budget:
            raise BudgetExceededError(
                f"{len(indices)} queries requested, {self.budget} left of {self.initial_budget}")
        return np.array([self.query(i) for i in indices], dtype=np.int8)
