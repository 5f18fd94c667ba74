"""Overlaid normalized histograms from experiment CSV outputs.

Two figures side by side: the absolute circuit-eigenvalue error
|lambda_hat - lambda_true| from estimates CSVs, and the per-gate total
variation distance from solution CSVs, one overlaid series per shot
count, on a log x-axis.  Reads only the documented CSV schema.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


class CsvFormatError(ValueError):
    """Missing columns, missing file, or a header with no data rows."""


@dataclass(frozen=True)
class PlotSpec:
    """What to read and where to render.

    `estimates` and `solutions` each map a series label (the shot count)
    to a CSV path; at least one input overall, bins >= 10.
    """

    estimates: tuple[Path, ...]
    solutions: tuple[Path, ...]
    out: Path
    log_x: bool = True
    bins: int = 40

    def __post_init__(self):
        if not self.estimates and not self.solutions:
            raise ValueError("need at least one input CSV")
        if self.bins < 10:
            raise ValueError("bin count must be >= 10")


def _read_rows(path: Path, required: tuple[str, ...]) -> list[dict[str, str]]:
    path = Path(path)
    if not path.exists():
        raise CsvFormatError(f"input CSV not found: {path}")
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise CsvFormatError(f"{path}: missing columns {missing}")
        rows = list(reader)
    if not rows:
        raise CsvFormatError(f"{path}: no data rows")
    return rows


def load_eigenvalue_errors(path: Path) -> tuple[str, np.ndarray]:
    """(series label, |lambda_hat - lambda_true| values) from one CSV."""
    rows = _read_rows(path, ("shots", "lambda_hat", "lambda_true"))
    errs = np.array([
        abs(float(r["lambda_hat"]) - float(r["lambda_true"])) for r in rows])
    shots = {r["shots"] for r in rows}
    label = f"S = {min(shots, key=int)}" if len(shots) == 1 else "mixed S"
    return label, errs


def load_gate_tvds(path: Path) -> tuple[str, np.ndarray]:
    """(series label, one TVD per gate) from one solution CSV."""
    rows = _read_rows(path, ("gate_id", "tvd"))
    per_gate: dict[str, float] = {}
    for r in rows:
        per_gate[r["gate_id"]] = float(r["tvd"])
    label = Path(path).stem
    if "_S" in label:
        label = f"S = {label.rsplit('_S', 1)[1]}"
    return label, np.array(list(per_gate.values()))


def _log_bins(series: list[np.ndarray], bins: int) -> np.ndarray:
    positive = np.concatenate([s[s > 0] for s in series]) if series else np.array([])
    if positive.size == 0:
        # All-zero data: a single decade at the left edge.
        return np.logspace(-13, -12, bins + 1)
    lo = max(positive.min() / 2, 1e-13)
    hi = max(positive.max() * 2, lo * 10)
    return np.logspace(np.log10(lo), np.log10(hi), bins + 1)


def _histogram(values: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Bin masses summing to 1; zeros are clipped to the left edge."""
    clipped = np.clip(values, edges[0], edges[-1])
    counts, _ = np.histogram(clipped, bins=edges)
    return counts / values.size


def _draw(ax, series: list[tuple[str, np.ndarray]], bins: int, log_x: bool,
          title: str, xlabel: str) -> None:
    data = [v for _, v in series]
    edges = _log_bins(data, bins) if log_x else np.histogram_bin_edges(
        np.concatenate(data), bins=bins)
    for label, values in series:
        mass = _histogram(values, edges)
        assert abs(mass.sum() - 1.0) < 1e-9
        ax.stairs(mass, edges, fill=True, alpha=0.45, label=label)
    if log_x:
        ax.set_xscale("log")
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("fraction")
    ax.legend()


def plot_histograms(spec: PlotSpec) -> Path:
    """Render the figure; returns the written image path."""
    est_series = [load_eigenvalue_errors(p) for p in spec.estimates]
    sol_series = [load_gate_tvds(p) for p in spec.solutions]
    n_panels = (1 if est_series else 0) + (1 if sol_series else 0)
    fig, axes = plt.subplots(1, n_panels, figsize=(6 * n_panels, 4.5))
    if n_panels == 1:
        axes = [axes]
    i = 0
    if est_series:
        _draw(axes[i], est_series, spec.bins, spec.log_x,
              "circuit eigenvalue error", "|estimated - true|")
        i += 1
    if sol_series:
        _draw(axes[i], sol_series, spec.bins, spec.log_x,
              "per-gate error-rate TVD", "total variation distance")
    fig.tight_layout()
    out = Path(spec.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out
