"""Compiled inner loops for graph construction and sequential dynamics."""

import numpy as np
from numba import njit


@njit(cache=True)
def _cell_range(ukeys, starts, ends, key):
    pos = np.searchsorted(ukeys, key)
    if pos < ukeys.size and ukeys[pos] == key:
        return starts[pos], ends[pos]
    return 0, 0


_SENTINEL = np.iinfo(np.int32).max


@njit(cache=True)
def _row_candidates(SX, s, skeys, order, ukeys, starts, ends, key_offsets, r2, buf, bounds):
    """Write the neighbors of sorted point ``s`` into ``buf``, one run per cell.

    Every run is ascending and followed by a sentinel; run ``k`` occupies
    ``buf[bounds[k]:bounds[k + 1]]`` including its sentinel. Returns the
    number of runs.
    """
    d = SX.shape[1]
    pos = 0
    nruns = 0
    bounds[0] = 0
    for o in key_offsets:
        lo, hi = _cell_range(ukeys, starts, ends, skeys[s] + o)
        run_start = pos
        for t in range(lo, hi):
            acc = 0.0
            for k in range(d):
                diff = SX[s, k] - SX[t, k]
                acc += diff * diff
            # branch-free append; a rejected slot is overwritten next time
            buf[pos] = order[t]
            pos += (acc <= r2) & (t != s)
        if pos > run_start:
            buf[pos] = _SENTINEL
            pos += 1
            nruns += 1
            bounds[nruns] = pos
    return nruns


@njit(cache=True)
def _merge_pass(src, dst, bounds, nruns):
    """Merge runs pairwise from ``src`` into ``dst``; returns the new run count."""
    out = 0
    k = 0
    while k < nruns:
        lo = bounds[k]
        if k + 1 < nruns:
            i = lo
            j = bounds[k + 1]
            hi = bounds[k + 2]
            # both sentinels survive as one trailing sentinel
            for p in range(lo, hi - 1):
                x = src[i]
                y = src[j]
                take = x <= y
                dst[p] = x if take else y
                i += take
                j += 1 - take
            dst[hi - 1] = _SENTINEL
        else:
            hi = bounds[k + 1]
            dst[lo:hi] = src[lo:hi]
        out += 1
        bounds[out] = hi
        k += 2
    return out


@njit(cache=True)
def grid_adjacency(SX, skeys, order, ukeys, starts, ends, key_offsets, r2):
    """CSR arrays of the closed-ball graph, rows in original index order.

    Within a cell, points keep ascending original index, so each row is a
    handful of sorted runs that are merged before being copied into place.
    """
    n, d = SX.shape
    nk = key_offsets.size
    deg = np.zeros(n, dtype=np.int64)
    widest = 0
    for s in range(n):
        cnt = 0
        cand = 0
        for o in key_offsets:
            lo, hi = _cell_range(ukeys, starts, ends, skeys[s] + o)
            cand += hi - lo
            for t in range(lo, hi):
                acc = 0.0
                for k in range(d):
                    diff = SX[s, k] - SX[t, k]
                    acc += diff * diff
                cnt += acc <= r2
        deg[order[s]] = cnt - 1
        widest = max(widest, cand)
    indptr = np.zeros(n + 1, dtype=np.int64)
    for i in range(n):
        indptr[i + 1] = indptr[i] + deg[i]
    indices = np.empty(indptr[n], dtype=np.int32)
    a = np.empty(widest + nk + 1, dtype=np.int32)
    b = np.empty_like(a)
    bounds = np.empty(nk + 1, dtype=np.int64)
    for s in range(n):
        nruns = _row_candidates(SX, s, skeys, order, ukeys, starts, ends, key_offsets, r2, a, bounds)
        src, dst = a, b
        while nruns > 1:
            nruns = _merge_pass(src, dst, bounds, nruns)
            src, dst = dst, src
        row = order[s]
        m = indptr[row + 1] - indptr[row]
        indices[indptr[row]:indptr[row + 1]] = src[:m]
    return indptr, indices


@njit(cache=True)
def async_majority(indptr, indices, labels, sums, sequence, truth):
    """Apply strict-majority updates in ``sequence`` order, in place.

    ``sums`` holds each sensor's neighbor-label sum and is kept current.
    Returns ``(flips, flips_to_wrong_label)``.
    """
    flips = 0
    wrong = 0
    for i in sequence:
        s = sums[i]
        if s == 0 or (s > 0) == (labels[i] > 0):
            continue
        new = 1 if s > 0 else -1
        labels[i] = new
        flips += 1
        if new != truth[i]:
            wrong += 1
        for p in range(indptr[i], indptr[i + 1]):
            sums[indices[p]] += 2 * new
    return flips, wrong


@njit(cache=True)
def neighbor_sums(indptr, indices, labels):
    n = indptr.size - 1
    out = np.zeros(n, dtype=np.int64)
    for i in range(n):
        acc = 0
        for p in range(indptr[i], indptr[i + 1]):
            acc += labels[indices[p]]
        out[i] = acc
    return out
