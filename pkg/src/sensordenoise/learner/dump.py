"""CSV dumps of learned hypotheses.

A linear hypothesis is one ``weight`` column with a row per coordinate. A
kernel hypothesis starts with a ``# kernel: <spec>`` line followed by
``index,coefficient`` rows; support points are looked up by sensor index in
the positions passed to :func:`read_hypothesis_csv`.
"""

from __future__ import annotations

import csv

import numpy as np

from ..errors import MalformedDataError
from ..field import FLOAT_FMT
from .kernel import GaussianKernel, KernelHypothesis, LinearKernel
from .linear import LinearHypothesis

_PREFIX = "# kernel: "


def write_hypothesis_csv(h, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if isinstance(h, LinearHypothesis):
            w.writerow(["weight"])
            w.writerows([format(float(v), FLOAT_FMT)] for v in h.weight)
            return
        fh.write(_PREFIX + h.kernel.describe() + "\n")
        w.writerow(["index", "coefficient"])
        for i, c in zip(h.support_indices, h.coefficients):
            w.writerow([int(i), format(float(c), FLOAT_FMT)])


def _parse_kernel(spec: str):
    name, _, rest = spec.strip().partition(" ")
    if name == "linear" and not rest:
        return LinearKernel()
    if name == "gaussian" and rest.startswith("bandwidth="):
        try:
            return GaussianKernel(float(rest[len("bandwidth="):]))
        except ValueError:
            pass
    raise MalformedDataError(f"unrecognized kernel spec {spec!r}")


def read_hypothesis_csv(path, positions=None):
    """Load a dump; kernel dumps need the sensor ``positions`` they index into."""
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise MalformedDataError(f"{path}: empty hypothesis file")
    try:
        if lines[0] == "weight":
            return LinearHypothesis(np.array([float(v) for v in lines[1:]]))
        if not lines[0].startswith(_PREFIX) or lines[1:2] != ["index,coefficient"]:
            raise MalformedDataError(f"{path}: unrecognized hypothesis header")
        if positions is None:
            raise MalformedDataError("a kernel hypothesis needs sensor positions")
        kernel = _parse_kernel(lines[0][len(_PREFIX):])
        rows = [line.split(",") for line in lines[2:]]
        idx = np.array([int(r[0]) for r in rows], dtype=np.int64)
        coef = np.array([float(r[1]) for r in rows])
    except (ValueError, IndexError):
        raise MalformedDataError(f"{path}: malformed hypothesis rows") from None
    positions = np.asarray(positions, dtype=float)
    if idx.size and (idx.min() < 0 or idx.max() >= len(positions)):
        raise MalformedDataError(f"{path}: support index outside the sensor set")
    return KernelHypothesis(idx, positions[idx], coef, kernel)
