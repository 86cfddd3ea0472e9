"""Radius-r neighbor graph over sensor positions and consensus-game payoffs."""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from ._kernels import grid_adjacency, neighbor_sums as _neighbor_sums
from .errors import ConfigurationError, DimensionMismatchError, InvalidRadiusError

@dataclass(frozen=True, eq=False)
class NeighborGraph:
    """Closed-ball adjacency in CSR layout; neighbor lists are sorted ascending."""

    radius: float
    indptr: np.ndarray
    indices: np.ndarray

    @property
    def n(self) -> int:
        return len(self.indptr) - 1

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, i: int) -> np.ndarray:
        if not 0 <= i < self.n:
            raise IndexError(f"sensor index {i} out of range for {self.n} sensors")
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    @property
    def adjacency(self) -> list[list[int]]:
        return [self.neighbors(i).tolist() for i in range(self.n)]

    @cached_property
    def matrix(self) -> sp.csr_matrix:
        data = np.ones(len(self.indices), dtype=np.int32)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    def neighbor_sums(self, labels: np.ndarray) -> np.ndarray:
        """Sum of neighbor labels for every sensor."""
        return _neighbor_sums(self.indptr, self.indices, np.ascontiguousarray(labels, dtype=np.int8))

    def edges(self) -> np.ndarray:
        """``(E, 2)`` array of undirected edges with ``i < j``, sorted."""
        rows = np.repeat(np.arange(self.n), self.degrees)
        keep = rows < self.indices
        return np.column_stack([rows[keep], self.indices[keep]])

    def __eq__(self, other):
        if not isinstance(other, NeighborGraph):
            return NotImplemented
        return (self.radius == other.radius
                and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices))

    __hash__ = None


def _csr_from_pairs(n: int, i: np.ndarray, j: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    rows = np.concatenate([i, j])
    cols = np.concatenate([j, i])
    order = np.lexsort((cols, rows))
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
    return indptr, cols[order].astype(np.int32)


def build_graph(positions, r: float) -> NeighborGraph:
    """Exact closed-ball adjacency ``||x_i - x_j|| <= r`` via a uniform grid.

    Points are bucketed into cells of side ``r``; candidates for a point come
    from its own cell and the ``3**d - 1`` adjacent ones.
    """
    if not r > 0:
        raise InvalidRadiusError(f"radius must be positive, got {r}")
    X = np.asarray(positions, dtype=float)
    if X.ndim == 1:
        X = X.reshape(len(X), -1) if len(X) else X.reshape(0, 1)
    n, d = X.shape
    if n < 2:
        return NeighborGraph(float(r), np.zeros(n + 1, dtype=np.int64), np.zeros(0, dtype=np.int32))

    side = r * (1 + 1e-9)
    cells = np.floor((X - X.min(axis=0)) / side).astype(np.int64) + 1
    extent = cells.max(axis=0) + 2
    strides = np.ones(d, dtype=np.int64)
    for k in range(d - 2, -1, -1):
        strides[k] = strides[k + 1] * extent[k + 1]
    keys = cells @ strides

    # stable sort keeps original index order inside each cell
    order = np.argsort(keys, kind="stable")
    skeys = keys[order]
    SX = np.ascontiguousarray(X[order])
    ukeys, starts, counts = np.unique(skeys, return_index=True, return_counts=True)
    ends = starts + counts
    offsets = np.array(list(itertools.product((-1, 0, 1), repeat=d)), dtype=np.int64)
    key_offsets = offsets @ strides
    r2 = float(r) * float(r)

    indptr, indices = grid_adjacency(SX, skeys, order, ukeys, starts.astype(np.int64),
                                     ends.astype(np.int64), key_offsets, r2)
    return NeighborGraph(float(r), indptr, indices)


def _check_labels(graph: NeighborGraph, labels) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.shape != (graph.n,):
        raise DimensionMismatchError(f"expected {graph.n} labels, got shape {labels.shape}")
    return labels


def payoffs(graph: NeighborGraph, labels) -> np.ndarray:
    """Correlation payoff of every sensor; isolated sensors get 1."""
    labels = _check_labels(graph, labels)
    agree = labels.astype(np.int64) * graph.neighbor_sums(labels)
    m = graph.degrees
    out = np.ones(graph.n)
    nz = m > 0
    out[nz] = agree[nz] / m[nz]
    return out


def payoff(graph: NeighborGraph, labels, i: int) -> float:
    """(agreeing neighbors - disagreeing neighbors) / degree, or 1 when isolated."""
    labels = _check_labels(graph, labels)
    nb = graph.neighbors(i)
    if nb.size == 0:
        return 1.0
    return float(labels[i] * labels[nb].astype(np.int64).sum() / nb.size)


def max_deviation_incentive(graph: NeighborGraph, labels) -> float:
    """Largest payoff gain any single sensor gets from flipping its state.

    Flipping negates a payoff, so the gain is ``-2 * payoff``. A labeling is an
    epsilon-equilibrium iff this value is at most epsilon.
    """
    if graph.n == 0:
        return 0.0
    return float(max(0.0, np.max(-2.0 * payoffs(graph, labels))))


def write_edges_csv(graph: NeighborGraph, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i", "j"])
        w.writerows(graph.edges().tolist())


def read_edges_csv(path, n: int, radius: float) -> NeighborGraph:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["i", "j"]:
        raise ConfigurationError(f"{path}: expected an 'i,j' header")
    e = np.array(rows[1:], dtype=np.int64).reshape(-1, 2)
    indptr, indices = _csr_from_pairs(n, e[:, 0], e[:, 1])
    return NeighborGraph(float(radius), indptr, indices)
