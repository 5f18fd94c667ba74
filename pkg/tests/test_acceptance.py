"""Acceptance suite.

Each test prints a single PASS line when its checks hold; the
full-scale smoke test carries the `fullscale` marker and is excluded
from the default run (see pyproject's pytest addopts).
"""

import json
import time

import numpy as np
import pytest

from aces.clifford import (
    Circuit,
    DEFAULT_1Q_SET,
    DEFAULT_2Q_SET,
    GateIdentity,
    GateKind,
    conjugate_gate,
    propagate,
    random_clifford_layers,
)
from aces.config import ExperimentConfig, NoiseConfig, RankRetryConfig
from aces.generator import ExperimentDesignSpec, generate_ensemble
from aces.noise import (
    DEFAULT_ERROR_RANGES,
    PauliChannel,
    eigenvalues_from_rates,
    random_noise_model,
    rates_from_eigenvalues,
)
from aces.pauli import PauliString
from aces.simulator import exact_circuit_eigenvalue, simulate_experiment
from aces.solver import build_design, per_gate_tvds, solve, variable_inventory

from oracles import (
    PAULI_MATS,
    circuit_unitary,
    conjugate_dense,
    noisy_circuit_eigenvalue,
    pauli_channel_apply,
    pauli_matrix,
)


def _ok(tag: str, detail: str = "") -> None:
    print(f"\nACCEPTANCE {tag}: PASS {detail}".rstrip())


# -- 1. transform duality --------------------------------------------------


def test_acceptance_1_transform_duality():
    t0 = time.time()
    rng = np.random.default_rng(2026)
    worst_rt, worst_fwd = 0.0, 0.0
    for trial in range(100):
        k = 1 if trial % 2 == 0 else 2
        p = rng.random(4**k)
        p /= p.sum()
        ch = PauliChannel(k, tuple(p))
        lam = eigenvalues_from_rates(ch)
        back, flagged = rates_from_eigenvalues(lam)
        assert flagged == 0
        worst_rt = max(worst_rt, float(np.max(np.abs(np.asarray(back.rates) - p))))
        # Dense forward oracle on a couple of labels per trial.
        for b in rng.integers(0, 4**k, size=2):
            m = np.array([[1.0]], dtype=complex)
            for j in range(k):
                m = np.kron(PAULI_MATS[(int(b) >> (2 * j)) & 3], m)
            val = np.trace(m.conj().T @ pauli_channel_apply(p, k, m)).real / (1 << k)
            worst_fwd = max(worst_fwd, abs(float(lam[int(b)]) - val))
    assert worst_rt < 1e-12 and worst_fwd < 1e-12
    dt = time.time() - t0
    assert dt < 1.0
    _ok("1 transform-duality", f"(round-trip {worst_rt:.2e}, forward {worst_fwd:.2e}, {dt:.2f}s)")


# -- 2. Clifford propagation oracle equivalence ----------------------------


def test_acceptance_2_clifford_oracle():
    t0 = time.time()
    for kind in GateKind:
        if kind is GateKind.MEAS:
            continue
        if kind in (GateKind.CX, GateKind.CZ):
            for qubits in ((0, 1), (1, 0)):
                g = GateIdentity(kind, qubits)
                for x in range(4):
                    for z in range(4):
                        p = PauliString(2, x, z, 1)
                        assert conjugate_gate(g, p) == conjugate_dense(g, p)
        else:
            g = GateIdentity(kind, (0,))
            for x in range(2):
                for z in range(2):
                    p = PauliString(1, x, z, 1)
                    assert conjugate_gate(g, p) == conjugate_dense(g, p)
    rng = np.random.default_rng(2027)
    for _ in range(200):
        depth = int(rng.integers(1, 7))
        c = Circuit(2, random_clifford_layers(2, depth, rng,
                                              DEFAULT_1Q_SET, DEFAULT_2Q_SET))
        u = circuit_unitary(c)
        for x in range(4):
            for z in range(4):
                p = PauliString(2, x, z, 1)
                out = propagate(c, p).output
                assert np.allclose(u @ pauli_matrix(p) @ u.conj().T,
                                   pauli_matrix(out), atol=1e-12)
    dt = time.time() - t0
    assert dt < 10.0
    _ok("2 clifford-oracle", f"({dt:.1f}s)")


# -- 3. eigenvalue product law ---------------------------------------------


def _random_noisy_case(seed):
    rng = np.random.default_rng(seed)
    depth = int(rng.integers(1, 7))
    c = Circuit(2, random_clifford_layers(2, depth, rng,
                                          DEFAULT_1Q_SET, DEFAULT_2Q_SET))
    gates = [v[0] for v in variable_inventory([c]) if v[0].kind is not GateKind.MEAS]
    nm = random_noise_model(gates, qubits=range(2),
                            ranges=DEFAULT_ERROR_RANGES, seed=seed)
    x = int(rng.integers(0, 4))
    z = int(rng.integers(0, 4))
    if x == 0 and z == 0:
        x = 1
    return c, nm, PauliString(2, x, z, 1)


def test_acceptance_3_eigenvalue_product_law():
    t0 = time.time()
    worst = 0.0
    for seed in range(200):
        c, nm, p = _random_noisy_case(10_000 + seed)
        got = exact_circuit_eigenvalue(c, nm, p)
        want = noisy_circuit_eigenvalue(c, nm, p)
        worst = max(worst, abs(got - want))
    assert worst < 1e-10
    dt = time.time() - t0
    assert dt < 30.0
    _ok("3 eigenvalue-product-law", f"(max dev {worst:.2e}, {dt:.1f}s)")


# -- 4. sampler unbiasedness and shot scaling ------------------------------


def test_acceptance_4_sampler_unbiasedness():
    t0 = time.time()
    shots = 10_000
    hits = 0
    for seed in range(100):
        c, nm, p = _random_noisy_case(20_000 + seed)
        lam = exact_circuit_eigenvalue(c, nm, p)
        est = simulate_experiment(c, nm, [p], shots=shots, seed=seed,
                                  circuit_id=0)[0]
        sigma = np.sqrt(max(1.0 - lam * lam, 1e-12) / shots)
        if abs(est.lambda_hat - lam) <= 4.0 * sigma:
            hits += 1
    assert hits >= 95
    # S^(-1/2) scaling of the empirical stderr, factor 1.5.
    c, nm, p = _random_noisy_case(33_000)
    reps = 40
    stds = []
    for shots in (1_000, 10_000, 100_000):
        vals = [simulate_experiment(c, nm, [p], shots=shots, seed=s,
                                    circuit_id=0)[0].lambda_hat
                for s in range(reps)]
        stds.append(float(np.std(vals, ddof=1)))
    ratios = (stds[0] / stds[1], stds[1] / stds[2])
    for r in ratios:
        assert np.sqrt(10) / 1.5 < r < np.sqrt(10) * 1.5
    dt = time.time() - t0
    assert dt < 120.0
    _ok("4 sampler-unbiasedness",
        f"({hits}/100 in 4-sigma, scaling ratios {ratios[0]:.2f}/{ratios[1]:.2f}, {dt:.0f}s)")


# -- 5. exact-data inversion at n = 20 -------------------------------------

DESK_SPEC = ExperimentDesignSpec(
    n=20, circuit_count=12, half_depths=(2, 3, 4, 5, 6, 8, 10, 12, 14, 16, 9, 7),
    pad_depth=5, weight2_fraction=1.0, weight_cap=6, seed=20260826)


def test_acceptance_5_exact_data_inversion():
    t0 = time.time()
    ens = generate_ensemble(DESK_SPEC)
    design = build_design(ens.circuits, ens.inputs)
    assert design.rank() == design.n_vars
    gates = [v[0] for v in variable_inventory(ens.circuits)
             if v[0].kind is not GateKind.MEAS]
    nm = random_noise_model(gates, qubits=range(20),
                            ranges=DEFAULT_ERROR_RANGES, seed=20260826)
    b = np.array([
        exact_circuit_eigenvalue(ens.circuits[cid], nm, p)
        for cid, inputs in enumerate(ens.inputs) for p in inputs])
    result = solve(design, b, truth=nm)
    worst = max(float(np.max(ge.eigenvalue_errors()))
                for ge in result.estimates.values())
    assert worst < 1e-9
    dt = time.time() - t0
    assert dt < 60.0
    _ok("5 exact-data-inversion", f"(max lambda err {worst:.2e}, {dt:.0f}s)")


# -- 6. desk-scale replication ----------------------------------------------

# Thresholds pinned by the seeded pilot run recorded in
# configs/desk.yaml (seed 20260826): p95 TVD 0.0069 at S=1e4 and a
# median-TVD improvement factor of 7.7 from S=1e4 to S=1e6.
P95_TVD_LIMIT = 0.01
IMPROVEMENT_RANGE = (5.0, 20.0)


@pytest.mark.slow
def test_acceptance_6_desk_scale(tmp_path):
    from aces.pipeline import run_pipeline

    t0 = time.time()
    cfg = ExperimentConfig(
        n=20, circuits=12, depth_min=2, depth_max=16, pad_depth=5,
        weight2_fraction=1.0, weight_cap=6,
        noise=NoiseConfig(source="random", ranges=DEFAULT_ERROR_RANGES),
        shots=[10_000, 1_000_000], seed=20260826,
        output_dir=str(tmp_path / "desk"),
        rank_retry=RankRetryConfig())
    summary = run_pipeline(cfg)
    assert summary["design"]["rank"] == summary["design"]["n_vars"]
    per = summary["per_shots"]
    p95 = per["10000"]["tvd_p95"]
    ratio = per["10000"]["tvd_median"] / per["1000000"]["tvd_median"]
    assert p95 <= P95_TVD_LIMIT
    assert IMPROVEMENT_RANGE[0] <= ratio <= IMPROVEMENT_RANGE[1]
    dt = time.time() - t0
    assert dt < 900.0
    _ok("6 desk-scale",
        f"(p95 TVD {p95:.4f} at S=1e4, improvement x{ratio:.1f}, {dt:.0f}s)")


# -- 7. full-scale smoke (optional, excluded by default) -------------------


@pytest.mark.fullscale
def test_acceptance_7_full_scale(tmp_path):
    from aces.pipeline import run_pipeline

    cfg = ExperimentConfig(
        n=100, circuits=19, depth_min=2, depth_max=32, pad_depth=5,
        weight2_fraction=1.0, weight_cap=6,
        noise=NoiseConfig(source="random", ranges=DEFAULT_ERROR_RANGES),
        shots=[10_000, 1_000_000], seed=20260826,
        output_dir=str(tmp_path / "full"),
        rank_retry=RankRetryConfig())
    summary = run_pipeline(cfg)
    design = summary["design"]
    assert design["n_vars"] == 5070
    assert design["rank"] == 5070
    per = summary["per_shots"]
    assert per["10000"]["gate_count"] == 898
    assert design["m"] >= 10_000
    # Reference-run percentiles with +-50% slack (different noise draw).
    assert per["10000"]["tvd_p95"] <= 0.0064 * 1.5
    assert per["1000000"]["tvd_p95"] <= 0.001 * 1.5
    _ok("7 full-scale",
        f"(N=5070 rank {design['rank']}, rows {design['m']}, "
        f"p95 {per['10000']['tvd_p95']:.4f}/{per['1000000']['tvd_p95']:.5f})")


# -- 8. rank condition enforcement -----------------------------------------


def test_acceptance_8_rank_retry(tmp_path):
    from aces.pipeline import stage_design, stage_generate

    t0 = time.time()
    cfg = ExperimentConfig(
        n=20, circuits=12, depth_min=2, depth_max=16, pad_depth=0,
        weight2_fraction=1.0, weight_cap=6,
        noise=NoiseConfig(source="random", ranges=DEFAULT_ERROR_RANGES),
        shots=[100], seed=20260826,
        output_dir=str(tmp_path / "mirror0"),
        rank_retry=RankRetryConfig(max_attempts=6, extra_circuits=3,
                                   retry_pad_depth=10))
    stage_generate(cfg)
    design = stage_design(cfg)
    meta = json.loads((tmp_path / "mirror0" / "design.json").read_text())
    attempts = meta["attempts"]
    # Pure mirrors must be detected as deficient, then padded to rank N.
    assert attempts[0]["rank"] < attempts[0]["n_vars"]
    assert len(attempts) > 1
    assert design.rank() == design.n_vars
    dt = time.time() - t0
    _ok("8 rank-retry",
        f"(initial rank {attempts[0]['rank']}/{attempts[0]['n_vars']}, "
        f"{len(attempts)} attempts, final rank N, {dt:.0f}s)")
