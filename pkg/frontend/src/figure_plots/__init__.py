"""Histogram rendering for eigenvalue-error and per-gate-TVD CSVs."""

from .plots import (
    CsvFormatError,
    PlotSpec,
    load_eigenvalue_errors,
    load_gate_tvds,
    plot_histograms,
)

__all__ = [
    "CsvFormatError",
    "PlotSpec",
    "load_eigenvalue_errors",
    "load_gate_tvds",
    "plot_histograms",
]

__version__ = "0.1.0"
