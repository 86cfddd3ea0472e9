"""SVG line plots of denoising and learning curves.

Each plotted mean is drawn as a line whose SVG group id is
``mean:<series label>``. The data-to-canvas mapping of the axes is stored in
the SVG description so :func:`read_svg_series` can recover plotted values
from the file alone.
"""

from __future__ import annotations

import csv
import json
import re
import xml.etree.ElementTree as ET
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ..errors import MalformedDataError  # noqa: E402

DENOISE_HEADER = ["eta_initial", "trial", "round", "noise_rate"]
LEARN_HEADER = ["condition", "budget", "trial", "error"]

_RC = {
    "svg.hashsalt": "sensordenoise",
    "svg.fonttype": "none",
    "path.simplify": False,
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
}


def _read_table(path, header: list[str]) -> list[dict[str, str]]:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise MalformedDataError(f"cannot read {path}: {exc}") from None
    if not rows or rows[0] != header:
        raise MalformedDataError(f"{path}: expected header {','.join(header)}")
    body = rows[1:]
    if not body:
        raise MalformedDataError(f"{path}: no data rows")
    if any(len(r) != len(header) for r in body):
        raise MalformedDataError(f"{path}: ragged rows")
    return [dict(zip(header, r)) for r in body]


def detect_kind(path) -> str:
    try:
        with open(path, newline="") as fh:
            first = next(csv.reader(fh), [])
    except OSError as exc:
        raise MalformedDataError(f"cannot read {path}: {exc}") from None
    if first == DENOISE_HEADER:
        return "denoise"
    if first == LEARN_HEADER:
        return "learn"
    raise MalformedDataError(f"{path}: unrecognized header {','.join(first)}")


def _float(value: str, path) -> float:
    try:
        return float(value)
    except ValueError:
        raise MalformedDataError(f"{path}: bad number {value!r}") from None


def _series(rows, key, x_col, y_col, path) -> dict[str, tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Group by ``key`` and ``x``; return mean and sample std across trials."""
    groups: dict[str, dict[float, list[float]]] = defaultdict(lambda: defaultdict(list))
    for r in rows:
        groups[r[key]][_float(r[x_col], path)].append(_float(r[y_col], path))
    out = {}
    for label, by_x in groups.items():
        xs = np.array(sorted(by_x))
        vals = [np.array(by_x[x]) for x in xs]
        means = np.array([v.mean() for v in vals])
        stds = np.array([v.std(ddof=1) if v.size > 1 else 0.0 for v in vals])
        out[label] = (xs, means, stds)
    return out


def _save(fig, ax, path: Path) -> Path:
    fig.canvas.draw()
    bbox = ax.get_window_extent()
    meta = {
        "xlim": list(ax.get_xlim()),
        "ylim": list(ax.get_ylim()),
        "axes_px": [bbox.x0, bbox.y0, bbox.x1, bbox.y1],
        "fig_px": [fig.bbox.width, fig.bbox.height],
        "dpi": fig.dpi,
    }
    fig.savefig(path, format="svg", metadata={"Date": None, "Description": json.dumps(meta)})
    plt.close(fig)
    return path


def _plot(series, xlabel: str, ylabel: str, title: str, path: Path, label_fmt=str) -> Path:
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5.0, 3.4))
        for label in sorted(series):
            xs, means, stds = series[label]
            line, = ax.plot(xs, means, lw=1.4, label=label_fmt(label))
            line.set_gid(f"mean:{label}")
            ax.fill_between(xs, means - stds, means + stds, color=line.get_color(), alpha=0.18, lw=0)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.set_title(title)
        ax.legend(frameon=False, fontsize=7, ncol=2)
        fig.tight_layout()
        return _save(fig, ax, path)


def plot_denoise(csv_path, out_dir) -> list[Path]:
    rows = _read_table(csv_path, DENOISE_HEADER)
    series = _series(rows, "eta_initial", "round", "noise_rate", csv_path)
    out = Path(out_dir) / f"{Path(csv_path).stem}.svg"
    return [_plot(series, "round", "noise rate", "Noise rate under best-response dynamics", out,
                  lambda s: f"eta={float(s):.2f}")]


def plot_learn(csv_path, out_dir) -> list[Path]:
    """One figure per condition set: all four conditions, then active vs passive after denoising."""
    rows = _read_table(csv_path, LEARN_HEADER)
    series = _series(rows, "condition", "budget", "error", csv_path)
    stem = Path(csv_path).stem
    out = [_plot(series, "label budget", "generalization error", "Pre- vs post-denoising",
                 Path(out_dir) / f"{stem}_all.svg")]
    post = {k: v for k, v in series.items() if k.endswith("_post")}
    if post:
        out.append(_plot(post, "label budget", "generalization error", "After denoising",
                         Path(out_dir) / f"{stem}_post.svg"))
    return out


def cmd_plot(csv_paths, out_dir) -> list[Path]:
    if not csv_paths:
        raise MalformedDataError("no CSV files given")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for p in csv_paths:
        kind = detect_kind(p)
        written += plot_denoise(p, out) if kind == "denoise" else plot_learn(p, out)
    return written


_NUM = re.compile(r"-?\d+(?:\.\d+)?(?:e-?\d+)?")


def read_svg_series(path) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Recover ``label -> (x, y)`` data values of every mean line in an SVG from :func:`cmd_plot`."""
    tree = ET.parse(path)
    ns = {"svg": "http://www.w3.org/2000/svg", "dc": "http://purl.org/dc/elements/1.1/"}
    desc = tree.find(".//dc:description", ns)
    if desc is None or not desc.text:
        raise MalformedDataError(f"{path}: no axes metadata")
    meta = json.loads(desc.text)
    (x0, x1), (y0, y1) = meta["xlim"], meta["ylim"]
    ax0, ay0, ax1, ay1 = meta["axes_px"]
    height = meta["fig_px"][1]
    # svg user units are points; display coordinates are pixels at ``dpi``
    scale = 72.0 / meta["dpi"]
    out = {}
    for g in tree.iter("{http://www.w3.org/2000/svg}g"):
        gid = g.get("id", "")
        if not gid.startswith("mean:"):
            continue
        d = g.find("svg:path", ns).get("d")
        nums = np.array([float(v) for v in _NUM.findall(d)]).reshape(-1, 2)
        px = nums[:, 0] / scale
        py = height - nums[:, 1] / scale
        xs = x0 + (px - ax0) / (ax1 - ax0) * (x1 - x0)
        ys = y0 + (py - ay0) / (ay1 - ay0) * (y1 - y0)
        out[gid[len("mean:"):]] = (xs, ys)
    return out
