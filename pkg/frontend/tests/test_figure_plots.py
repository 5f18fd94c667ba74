import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from figure_plots import (
    CsvFormatError,
    PlotSpec,
    load_eigenvalue_errors,
    load_gate_tvds,
    plot_histograms,
)
from figure_plots.plots import _histogram, _log_bins

ESTIMATES_HEADER = "circuit_id,input_pauli,output_pauli,shots,lambda_hat,stderr,lambda_true\n"
SOLUTION_HEADER = "gate_id,pauli,lambda_hat,p_hat,lambda_true,p_true,tvd\n"


def write_estimates(path, shots, errors, rng):
    lines = [ESTIMATES_HEADER]
    for i, err in enumerate(errors):
        true = float(rng.uniform(0.8, 1.0))
        lines.append(f"{i},X,X,{shots},{true + err:.12g},0.001,{true:.12g}\n")
    Path(path).write_text("".join(lines))
    return Path(path)


def write_solution(path, tvds):
    lines = [SOLUTION_HEADER]
    for i, t in enumerate(tvds):
        for pauli in ("X", "Z"):  # several rows per gate share one TVD
            lines.append(f"H {i},{pauli},0.99,0.003,0.991,0.0031,{t:.12g}\n")
    Path(path).write_text("".join(lines))
    return Path(path)


def test_plot_spec_invariants(tmp_path):
    with pytest.raises(ValueError):
        PlotSpec(estimates=(), solutions=(), out=tmp_path / "o.png")
    with pytest.raises(ValueError):
        PlotSpec(estimates=(tmp_path / "a.csv",), solutions=(),
                 out=tmp_path / "o.png", bins=5)


def test_loaders(tmp_path):
    rng = np.random.default_rng(1)
    est = write_estimates(tmp_path / "estimates_S1000.csv", 1000,
                          rng.uniform(0, 0.02, 50), rng)
    label, errs = load_eigenvalue_errors(est)
    assert label == "S = 1000" and errs.shape == (50,) and np.all(errs >= 0)
    sol = write_solution(tmp_path / "solution_S1000.csv", rng.uniform(0, 0.01, 20))
    label, tvds = load_gate_tvds(sol)
    assert label == "S = 1000" and tvds.shape == (20,)  # deduped per gate


def test_histogram_mass_normalized():
    rng = np.random.default_rng(2)
    series = [rng.uniform(1e-5, 1e-2, 500), rng.uniform(1e-6, 1e-3, 300)]
    edges = _log_bins(series, 40)
    for values in series:
        mass = _histogram(values, edges)
        assert abs(mass.sum() - 1.0) < 1e-9


def test_render_two_series(tmp_path):
    rng = np.random.default_rng(3)
    spec = PlotSpec(
        estimates=(
            write_estimates(tmp_path / "estimates_S1000.csv", 1000,
                            rng.uniform(0, 0.03, 200), rng),
            write_estimates(tmp_path / "estimates_S100000.csv", 100000,
                            rng.uniform(0, 0.003, 200), rng),
        ),
        solutions=(
            write_solution(tmp_path / "solution_S1000.csv",
                           rng.uniform(0, 0.01, 60)),
            write_solution(tmp_path / "solution_S100000.csv",
                           rng.uniform(0, 0.001, 60)),
        ),
        out=tmp_path / "fig.png",
    )
    out = plot_histograms(spec)
    assert out.exists() and out.stat().st_size > 0


def test_all_zero_errors_no_crash(tmp_path):
    rng = np.random.default_rng(4)
    est = write_estimates(tmp_path / "estimates_S10.csv", 10, np.zeros(30), rng)
    spec = PlotSpec(estimates=(est,), solutions=(), out=tmp_path / "z.png")
    assert plot_histograms(spec).exists()


def test_deterministic_output(tmp_path):
    rng = np.random.default_rng(5)
    est = write_estimates(tmp_path / "estimates_S100.csv", 100,
                          rng.uniform(0, 0.05, 100), rng)
    a = plot_histograms(PlotSpec(estimates=(est,), solutions=(),
                                 out=tmp_path / "a.png"))
    b = plot_histograms(PlotSpec(estimates=(est,), solutions=(),
                                 out=tmp_path / "b.png"))
    assert a.read_bytes() == b.read_bytes()


def test_header_only_csv_rejected(tmp_path):
    bad = tmp_path / "estimates_S1.csv"
    bad.write_text(ESTIMATES_HEADER)
    with pytest.raises(CsvFormatError):
        load_eigenvalue_errors(bad)


def test_missing_columns_rejected(tmp_path):
    bad = tmp_path / "estimates_S1.csv"
    bad.write_text("circuit_id,lambda_hat\n0,0.9\n")
    with pytest.raises(CsvFormatError):
        load_eigenvalue_errors(bad)


def run_cli(*args):
    return subprocess.run([sys.executable, "-m", "figure_plots.cli", *args],
                          capture_output=True, text=True)


def test_cli_success_and_failure(tmp_path):
    rng = np.random.default_rng(6)
    est = write_estimates(tmp_path / "estimates_S1000.csv", 1000,
                          rng.uniform(0, 0.02, 40), rng)
    sol = write_solution(tmp_path / "solution_S1000.csv", rng.uniform(0, 0.01, 10))
    out = tmp_path / "fig.png"
    r = run_cli("--estimates", str(est), "--solutions", str(sol), "--out", str(out))
    assert r.returncode == 0, r.stderr
    assert out.exists()
    # Header-only CSV: nonzero exit with a message.
    bad = tmp_path / "empty.csv"
    bad.write_text(ESTIMATES_HEADER)
    r = run_cli("--estimates", str(bad), "--out", str(tmp_path / "x.png"))
    assert r.returncode == 1
    assert "no data rows" in r.stderr
    # No inputs at all: usage error.
    r = run_cli("--out", str(tmp_path / "y.png"))
    assert r.returncode == 2
