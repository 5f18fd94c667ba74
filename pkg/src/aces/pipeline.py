"""
Pipeline stages: generate -> design (with rank retry) -> simulate ->
solve -> report.  Each stage consumes the previous stage's files under
the configured output directory and is independently runnable; the full
pipeline is their composition.  All CSV artifacts are byte-deterministic
for a fixed config.
"""

from __future__ import annotations

import json
import os
import shutil
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .clifford import Circuit
from .config import ExperimentConfig
from .generator import GeneratedEnsemble, extend_ensemble, generate_ensemble
from .noise import NoiseModel, random_noise_model
from .pauli import PauliString
from .simulator import batch_inputs, estimates_to_csv, simulate_experiment
from .solver import (
    DesignMatrix,
    EigenvalueEstimate,
    RankDeficiencyError,
    build_design,
    diagnostics,
    null_space_combinations,
    per_gate_tvds,
    solution_to_csv,
    solve,
)


class PipelineError(RuntimeError):
    pass


def _outdir(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def worker_count() -> int:
    env = os.environ.get("ACES_THREADS")
    if env:
        return max(1, int(env))
    return 1


# -- generate ---------------------------------------------------------------


def write_ensemble(out: Path, ens: GeneratedEnsemble) -> None:
    cdir = out / "circuits"
    if cdir.exists():
        shutil.rmtree(cdir)
    cdir.mkdir(parents=True)
    for i, c in enumerate(ens.circuits):
        (cdir / f"circuit_{i:03d}.txt").write_text(c.to_text())
    with open(out / "inputs.csv", "w") as f:
        f.write("circuit_id,input_pauli\n")
        for cid, inputs in enumerate(ens.inputs):
            for p in inputs:
                f.write(f"{cid},{p}\n")
    with open(out / "ensemble.json", "w") as f:
        json.dump(
            {
                "n": ens.spec.n,
                "circuit_count": len(ens.circuits),
                "pad_depths": ens.pad_depths,
            },
            f,
            indent=1,
        )
        f.write("\n")


def load_ensemble(cfg: ExperimentConfig) -> GeneratedEnsemble:
    out = _outdir(cfg)
    meta_path = out / "ensemble.json"
    if not meta_path.exists():
        raise PipelineError(f"missing {meta_path}; run the generate stage first")
    meta = json.loads(meta_path.read_text())
    circuits = []
    for i in range(meta["circuit_count"]):
        circuits.append(Circuit.from_text((out / "circuits" / f"circuit_{i:03d}.txt").read_text()))
    inputs: list[list[PauliString]] = [[] for _ in circuits]
    with open(out / "inputs.csv") as f:
        next(f)
        for line in f:
            cid, text = line.strip().split(",")
            inputs[int(cid)].append(PauliString.from_string(text))
    return GeneratedEnsemble(cfg.design_spec(), circuits, inputs, meta["pad_depths"])


def stage_generate(cfg: ExperimentConfig) -> GeneratedEnsemble:
    ens = generate_ensemble(cfg.design_spec())
    write_ensemble(_outdir(cfg), ens)
    return ens


# -- design -----------------------------------------------------------------


def stage_design(cfg: ExperimentConfig) -> DesignMatrix:
    """Build the design matrix, padding with extra circuits until rank N."""
    out = _outdir(cfg)
    ens = load_ensemble(cfg)
    retry = cfg.rank_retry
    attempts = []
    for attempt in range(retry.max_attempts + 1):
        design = build_design(ens.circuits, ens.inputs)
        rank = design.rank()
        attempts.append({"circuits": len(ens.circuits), "rank": rank, "n_vars": design.n_vars})
        if rank == design.n_vars:
            break
        if attempt == retry.max_attempts:
            combos = null_space_combinations(design)
            raise RankDeficiencyError(rank, design.n_vars, combos)
        pad = max(retry.retry_pad_depth, cfg.pad_depth)
        ens = extend_ensemble(ens, retry.extra_circuits, pad)
    write_ensemble(out, ens)
    design.save(out / "design_matrix.txt", out / "design_rows.csv", out / "design_cols.csv")
    with open(out / "design.json", "w") as f:
        json.dump(
            {
                "m": design.m,
                "n_vars": design.n_vars,
                "rank": attempts[-1]["rank"],
                "attempts": attempts,
            },
            f,
            indent=1,
        )
        f.write("\n")
    _write_noise_model(cfg, ens)
    return design


def _write_noise_model(cfg: ExperimentConfig, ens: GeneratedEnsemble) -> None:
    out = _outdir(cfg)
    if cfg.noise.source == "file":
        nm = NoiseModel.load(cfg.noise.path)
    else:
        gates = set()
        for c in ens.circuits:
            gates.update(g.noise_id() for g in c.gates())
        nm = random_noise_model(gates, range(cfg.n), ranges=cfg.noise.ranges, seed=cfg.seed)
    nm.save(out / "noise_model.json")


def load_design(cfg: ExperimentConfig) -> tuple[DesignMatrix, dict]:
    out = _outdir(cfg)
    if not (out / "design.json").exists():
        raise PipelineError("missing design artifacts; run the design stage first")
    meta = json.loads((out / "design.json").read_text())
    ens = load_ensemble(cfg)
    design = build_design(ens.circuits, ens.inputs)
    if (design.m, design.n_vars) != (meta["m"], meta["n_vars"]):
        raise PipelineError("design artifacts out of sync with circuits")
    return design, meta


# -- simulate ---------------------------------------------------------------


def _simulate_circuit(args):
    c_text, nm_dict, input_texts, shots, seed, cid = args
    c = Circuit.from_text(c_text)
    nm = NoiseModel.from_dict(nm_dict)
    inputs = [PauliString.from_string(t) for t in input_texts]
    ests = simulate_experiment(c, nm, inputs, shots, seed, circuit_id=cid)
    n_batches = len(batch_inputs(c, inputs))
    return cid, ests, n_batches


def stage_simulate(cfg: ExperimentConfig) -> None:
    out = _outdir(cfg)
    ens = load_ensemble(cfg)
    nm_path = out / "noise_model.json"
    if not nm_path.exists():
        raise PipelineError("missing noise_model.json; run the design stage first")
    nm = NoiseModel.load(nm_path)
    circuits = {cid: c for cid, c in enumerate(ens.circuits)}
    tasks_static = [
        (c.to_text(), nm.to_dict(), [str(p) for p in ens.inputs[cid]], cid)
        for cid, c in circuits.items()
    ]
    batch_counts: dict[int, int] = {}
    for shots in cfg.shots:
        tasks = [(ct, nd, its, shots, cfg.seed, cid) for ct, nd, its, cid in tasks_static]
        workers = worker_count()
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_simulate_circuit, tasks))
        else:
            results = [_simulate_circuit(t) for t in tasks]
        results.sort(key=lambda r: r[0])
        all_est = []
        for cid, ests, n_batches in results:
            all_est.extend(ests)
            batch_counts[cid] = n_batches
        (out / f"estimates_S{shots}.csv").write_text(
            estimates_to_csv(all_est, nm=nm, circuits=circuits)
        )
    with open(out / "batches.csv", "w") as f:
        f.write("circuit_id,batch_count\n")
        for cid in sorted(batch_counts):
            f.write(f"{cid},{batch_counts[cid]}\n")


# -- solve ------------------------------------------------------------------


def load_estimates_csv(path) -> list[dict]:
    rows = []
    with open(path) as f:
        header = next(f).strip().split(",")
        for line in f:
            rows.append(dict(zip(header, line.strip().split(","))))
    return rows


def stage_solve(cfg: ExperimentConfig, estimates_paths: dict[int, Path] | None = None) -> None:
    out = _outdir(cfg)
    design, meta = load_design(cfg)
    if meta["rank"] < meta["n_vars"]:
        raise PipelineError("design matrix is rank deficient; cannot solve")
    nm_path = out / "noise_model.json"
    truth = NoiseModel.load(nm_path) if nm_path.exists() else None
    if estimates_paths is None:
        estimates_paths = {s: out / f"estimates_S{s}.csv" for s in cfg.shots}
    for shots, path in estimates_paths.items():
        if not Path(path).exists():
            raise PipelineError(f"missing estimates file {path}")
        rows = load_estimates_csv(path)
        by_key = {(int(r["circuit_id"]), r["input_pauli"]): r for r in rows}
        ordered = []
        for cid, p in design.rows:
            r = by_key.get((cid, str(p)))
            if r is None:
                raise PipelineError(f"estimate missing for circuit {cid} input {p}")
            ordered.append(
                EigenvalueEstimate(
                    circuit_id=cid,
                    input=p,
                    output=PauliString.from_string(r["output_pauli"]),
                    shots=int(r["shots"]),
                    lambda_hat=float(r["lambda_hat"]),
                    stderr=float(r["stderr"]),
                    plus_count=0,
                    minus_count=0,
                    sign_convention=1,
                )
            )
        result = solve(design, ordered, truth=truth, check_rank=False)
        (out / f"solution_S{shots}.csv").write_text(solution_to_csv(result, truth=truth))
        diag = diagnostics(design, result)
        with open(out / f"solve_S{shots}.json", "w") as f:
            json.dump(
                {
                    "shots": shots,
                    "residual_norm": result.residual_norm,
                    "dropped_rows": result.dropped_rows,
                    "truncated_vars": result.truncated_vars,
                    "negative_rates_clipped": result.negative_rates_clipped,
                    "pseudoinverse_norm": diag.pseudoinverse_norm,
                    "condition_number": diag.condition_number,
                },
                f,
                indent=1,
            )
            f.write("\n")


# -- report -----------------------------------------------------------------


def stage_report(cfg: ExperimentConfig) -> dict:
    """Recompute the run summary from saved artifacts only."""
    out = _outdir(cfg)
    meta = json.loads((out / "design.json").read_text())
    batch_counts = {}
    batches_path = out / "batches.csv"
    if batches_path.exists():
        with open(batches_path) as f:
            next(f)
            for line in f:
                cid, nb = line.strip().split(",")
                batch_counts[int(cid)] = int(nb)
    total_batches = sum(batch_counts.values())
    summary = {
        "config": {
            "n": cfg.n,
            "circuits_requested": cfg.circuits,
            "shots": cfg.shots,
            "seed": cfg.seed,
            "noise_source": cfg.noise.source,
            "noise_ranges": {k: list(v) for k, v in sorted(cfg.noise.ranges.items())},
        },
        "design": meta,
        "batch_counts": batch_counts,
        "total_batches": total_batches,
        "sample_complexity": {str(s): s * total_batches for s in cfg.shots},
        "per_shots": {},
    }
    nm_path = out / "noise_model.json"
    truth = NoiseModel.load(nm_path) if nm_path.exists() else None
    for shots in cfg.shots:
        entry = {}
        solve_json = out / f"solve_S{shots}.json"
        if solve_json.exists():
            entry.update(json.loads(solve_json.read_text()))
        sol_path = out / f"solution_S{shots}.csv"
        if truth is not None and sol_path.exists():
            tvds = _tvds_from_solution_csv(sol_path)
            if tvds:
                vals = np.array(list(tvds.values()))
                entry["gate_count"] = len(tvds)
                entry["tvd_median"] = float(np.median(vals))
                entry["tvd_p95"] = float(np.percentile(vals, 95))
                entry["tvd_max"] = float(vals.max())
        est_path = out / f"estimates_S{shots}.csv"
        if est_path.exists():
            rows = load_estimates_csv(est_path)
            entry["rows"] = len(rows)
            if rows and "lambda_true" in rows[0]:
                errs = np.array(
                    [abs(float(r["lambda_hat"]) - float(r["lambda_true"])) for r in rows]
                )
                entry["lambda_abs_err_median"] = float(np.median(errs))
                entry["lambda_abs_err_p95"] = float(np.percentile(errs, 95))
        summary["per_shots"][str(shots)] = entry
    with open(out / "summary.json", "w") as f:
        json.dump(summary, f, indent=1, sort_keys=True)
        f.write("\n")
    return summary


def _tvds_from_solution_csv(path) -> dict[str, float]:
    """Per-gate TVD from a solution CSV with truth columns; measurement
    rows (binary channels) aggregate per qubit by max over bases."""
    tvds: dict[str, float] = {}
    with open(path) as f:
        header = next(f).strip().split(",")
        if "tvd" not in header:
            return {}
        idx = {name: i for i, name in enumerate(header)}
        for line in f:
            parts = line.strip().split(",")
            gate = parts[idx["gate_id"]]
            val = float(parts[idx["tvd"]])
            if gate.startswith("MEAS"):
                key = " ".join(gate.split()[:2])
                tvds[key] = max(tvds.get(key, 0.0), val)
            else:
                tvds[gate] = val
    return tvds


# -- composition ------------------------------------------------------------

STAGES = ("generate", "design", "simulate", "solve", "report")


def run_stage(cfg: ExperimentConfig, stage: str):
    if stage == "generate":
        return stage_generate(cfg)
    if stage == "design":
        return stage_design(cfg)
    if stage == "simulate":
        return stage_simulate(cfg)
    if stage == "solve":
        return stage_solve(cfg)
    if stage == "report":
        return stage_report(cfg)
    raise PipelineError(f"unknown stage {stage!r}; expected one of {STAGES}")


def run_pipeline(cfg: ExperimentConfig) -> dict:
    """Full pipeline; returns the summary dict and records runtimes."""
    runtimes = {}
    for stage in STAGES:
        t0 = time.time()
        result = run_stage(cfg, stage)
        runtimes[stage] = time.time() - t0
    out = _outdir(cfg)
    with open(out / "runtimes.json", "w") as f:
        json.dump({k: round(v, 3) for k, v in runtimes.items()}, f, indent=1)
        f.write("\n")
    return result
