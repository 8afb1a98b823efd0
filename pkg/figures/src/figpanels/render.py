"""Read-only rendering of CSV series into a multi-panel image."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .spec import FigureSpec, Series  # noqa: E402


class DataError(ValueError):
    pass


@dataclass
class RenderResult:
    output: Path
    points_per_series: list[list[int]]  # per panel, per series


def _read_columns(path: Path, x_column: str, y_column: str):
    if not path.exists():
        raise DataError(f"csv file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"csv file {path} is empty") from None
        for column in (x_column, y_column):
            if column not in header:
                raise DataError(
                    f"column {column!r} not found in {path} "
                    f"(has: {', '.join(header)})")
        ix, iy = header.index(x_column), header.index(y_column)
        xs, ys = [], []
        for row in reader:
            xs.append(float(row[ix]))
            ys.append(float(row[iy]))
    if not xs:
        raise DataError(f"csv file {path} has a header but no data rows")
    return np.asarray(xs), np.asarray(ys)


def render(spec: FigureSpec, data_root: str | Path = ".",
           out_dir: str | Path = ".") -> RenderResult:
    """Plot every series of every panel; returns per-series point counts."""
    root = Path(data_root)
    fig, axes = plt.subplots(spec.rows, spec.cols, squeeze=False,
                             figsize=(5.0 * spec.cols, 2.8 * spec.rows))
    flat = axes.ravel()
    counts: list[list[int]] = []
    for k, panel in enumerate(spec.panels):
        ax = flat[k]
        panel_counts = []
        for series in panel.series:
            path = Path(series.csv_path)
            if not path.is_absolute():
                path = root / path
            x, y = _read_columns(path, series.x_column, series.y_column)
            ax.plot(x, y, label=series.label or None)
            panel_counts.append(x.size)
        counts.append(panel_counts)
        if panel.logy:
            ax.set_yscale("log")
        if panel.title:
            ax.set_title(panel.title)
        if panel.xlabel:
            ax.set_xlabel(panel.xlabel)
        if panel.ylabel:
            ax.set_ylabel(panel.ylabel)
        if any(s.label for s in panel.series):
            ax.legend(fontsize="small")
    for k in range(len(spec.panels), flat.size):
        flat[k].set_visible(False)
    if spec.title:
        fig.suptitle(spec.title)
    fig.tight_layout()
    output = Path(out_dir) / spec.output
    output.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(output, dpi=150)
    plt.close(fig)
    return RenderResult(output=output, points_per_series=counts)
