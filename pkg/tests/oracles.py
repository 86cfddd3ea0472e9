"""Brute-force reference implementations shared by the unit and acceptance tests."""

import numpy as np


def brute_force(X, r):
    """O(N^2) closed-ball adjacency."""
    D = np.linalg.norm(X[:, None, :] - X[None, :, :], axis=-1)
    np.fill_diagonal(D, np.inf)
    return [list(np.flatnonzero(row <= r)) for row in D]


def brute_force_conservative(offsets, labels):
    """Enumerate one line just on either side of every neighbor direction."""
    m = len(labels)
    psi = np.sort(np.mod(np.arctan2(offsets[:, 1], offsets[:, 0]), np.pi))
    gaps = np.diff(np.concatenate([psi, [psi[0] + np.pi]]))
    delta = 0.25 * gaps[gaps > 0].min() if (gaps > 0).any() else 0.1
    verdicts = set()
    for p in psi:
        for theta in (p - delta, p + delta):
            normal = np.array([-np.sin(theta), np.cos(theta)])
            side = offsets @ normal > 0
            left, right = side.sum(), m - side.sum()
            if 4 * left < m or 4 * right < m:
                continue
            ls, rs = labels[side].sum(), labels[~side].sum()
            verdicts.add(1 if ls > 0 and rs > 0 else -1 if ls < 0 and rs < 0 else 0)
    if not verdicts or len(verdicts) > 1:
        return 0
    return verdicts.pop()
