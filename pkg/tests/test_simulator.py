import numpy as np
import pytest

from aces.clifford import Circuit, DEFAULT_1Q_SET, DEFAULT_2Q_SET, random_clifford_layers
from aces.generator import choose_input_paulis, generate_mirror_circuit
from aces.noise import DEFAULT_ERROR_RANGES, noiseless_model, random_noise_model
from aces.pauli import PauliString
from aces.simulator import (
    Batch,
    batch_inputs,
    estimates_to_csv,
    exact_circuit_eigenvalue,
    simulate_experiment,
)
from aces.solver import variable_inventory

from oracles import noisy_circuit_eigenvalue


def _random_case(seed, n=2, max_depth=6):
    rng = np.random.default_rng(seed)
    depth = int(rng.integers(1, max_depth + 1))
    layers = random_clifford_layers(n, depth, rng, DEFAULT_1Q_SET, DEFAULT_2Q_SET)
    c = Circuit(n, layers)
    gates = [g for _, g in sorted({str(v[0]): v[0] for v in variable_inventory([c])}.items())]
    gates = [g for g in gates if g.kind.value != "MEAS"]
    nm = random_noise_model(gates, qubits=range(n),
                            ranges=DEFAULT_ERROR_RANGES, seed=seed)
    x = int(rng.integers(0, 1 << n))
    z = int(rng.integers(0, 1 << n))
    if x == 0 and z == 0:
        x = 1
    return c, nm, PauliString(n, x, z, 1)


def test_exact_eigenvalue_matches_dense_oracle():
    for seed in range(40):
        c, nm, p = _random_case(seed)
        got = exact_circuit_eigenvalue(c, nm, p)
        want = noisy_circuit_eigenvalue(c, nm, p)
        assert abs(got - want) < 1e-10, seed


def test_noiseless_eigenvalue_is_one():
    rng = np.random.default_rng(3)
    c = generate_mirror_circuit(3, 3, 2, rng)
    nm = noiseless_model([v[0] for v in variable_inventory([c])], qubits=range(3))
    for p in choose_input_paulis(c, weight2=True):
        assert exact_circuit_eigenvalue(c, nm, p) == 1.0


def test_noiseless_sampler_is_exact():
    rng = np.random.default_rng(4)
    c = generate_mirror_circuit(3, 3, 2, rng)
    nm = noiseless_model([v[0] for v in variable_inventory([c])], qubits=range(3))
    inputs = choose_input_paulis(c, weight2=False)
    ests = simulate_experiment(c, nm, inputs, shots=50, seed=9, circuit_id=0)
    for e in ests:
        assert e.lambda_hat == 1.0
        assert e.stderr == 0.0


def test_batching_covers_all_inputs_disjointly():
    rng = np.random.default_rng(5)
    c = generate_mirror_circuit(6, 4, 3, rng)
    inputs = choose_input_paulis(c, weight2=True)
    batches = batch_inputs(c, inputs)
    from aces.clifford import propagate

    outputs = [propagate(c, p).output for p in inputs]
    seen = []
    for b in batches:
        total = 0
        for i in b.members:
            m = outputs[i].support_mask()
            assert total & m == 0  # outputs in one batch are disjoint
            total |= m
            # Basis assignment covers each member's output letters.
            for q in outputs[i].support():
                assert b.basis[q] == "IXZY"[outputs[i].code_at(q)]
        seen.extend(b.members)
    assert sorted(seen) == list(range(len(inputs)))
    assert len(batches) < len(inputs)  # batching actually merges some


def test_sampler_unbiased_z_scores():
    zs = []
    for seed in range(25):
        c, nm, p = _random_case(seed + 500)
        lam = exact_circuit_eigenvalue(c, nm, p)
        shots = 4000
        est = simulate_experiment(c, nm, [p], shots=shots, seed=seed, circuit_id=0)[0]
        sigma = np.sqrt(max(1.0 - lam * lam, 1e-12) / shots)
        zs.append((est.lambda_hat - lam) / sigma)
    zs = np.asarray(zs)
    assert np.all(np.abs(zs) < 4.5)
    assert abs(zs.mean()) < 3.0 / np.sqrt(len(zs))


def test_stderr_scales_with_shots():
    c, nm, p = _random_case(901, n=3)
    reps = 30
    stds = []
    for shots in (1000, 10000):
        vals = [
            simulate_experiment(c, nm, [p], shots=shots, seed=s, circuit_id=0)[0].lambda_hat
            for s in range(reps)
        ]
        stds.append(np.std(vals, ddof=1))
    ratio = stds[0] / stds[1]
    assert np.sqrt(10) / 1.6 < ratio < np.sqrt(10) * 1.6


def test_batched_and_unbatched_agree_in_expectation():
    rng = np.random.default_rng(6)
    c = generate_mirror_circuit(4, 3, 2, rng)
    gates = [v[0] for v in variable_inventory([c])]
    nm = random_noise_model([g for g in gates if g.kind.value != "MEAS"],
                            qubits=range(4), ranges=DEFAULT_ERROR_RANGES, seed=6)
    inputs = choose_input_paulis(c, weight2=False)
    joint = {}
    solo = {}
    reps, shots = 12, 2000
    for s in range(reps):
        for e in simulate_experiment(c, nm, inputs, shots=shots, seed=s, circuit_id=0):
            joint.setdefault(str(e.input), []).append(e.lambda_hat)
        for i, p in enumerate(inputs):
            one = simulate_experiment(c, nm, [p], shots=shots, seed=1000 + s,
                                      circuit_id=i)[0]
            solo.setdefault(str(p), []).append(one.lambda_hat)
    for key in joint:
        lam = exact_circuit_eigenvalue(c, nm, PauliString.from_string(key))
        se = np.sqrt((1 - lam * lam) / (shots * reps)) + 1e-9
        assert abs(np.mean(joint[key]) - lam) < 5 * se
        assert abs(np.mean(solo[key]) - lam) < 5 * se


def test_determinism_same_seed():
    c, nm, p = _random_case(321, n=3)
    a = simulate_experiment(c, nm, [p], shots=5000, seed=7, circuit_id=2)
    b = simulate_experiment(c, nm, [p], shots=5000, seed=7, circuit_id=2)
    assert [(e.lambda_hat, e.stderr, e.plus_count, e.minus_count) for e in a] == [
        (e.lambda_hat, e.stderr, e.plus_count, e.minus_count) for e in b]
    d = simulate_experiment(c, nm, [p], shots=5000, seed=8, circuit_id=2)
    assert a[0].lambda_hat != d[0].lambda_hat or a[0].plus_count != d[0].plus_count


def test_negative_eigenvalue_recovered():
    # A strong Y-flip channel drives lambda_Z of an S gate circuit negative.
    c = Circuit.from_text("qubits 2\nS 0; I 1\nmeasure\n")
    gates = [v[0] for v in variable_inventory([c]) if v[0].kind.value != "MEAS"]
    nm = random_noise_model(gates, qubits=range(2),
                            ranges=DEFAULT_ERROR_RANGES, seed=0)
    from aces.noise import PauliChannel

    strong = PauliChannel(1, (0.2, 0.0, 0.0, 0.8))  # mostly Y flips
    for g in list(nm.gate_noise):
        if g.kind.value in ("S", "I"):
            nm.gate_noise[g] = strong
    p = PauliString.single(2, 0, "Z")
    lam = exact_circuit_eigenvalue(c, nm, p)
    assert lam < -0.1
    est = simulate_experiment(c, nm, [p], shots=20000, seed=11, circuit_id=0)[0]
    assert abs(est.lambda_hat - lam) < 5 * np.sqrt((1 - lam * lam) / 20000) + 1e-9


def test_invalid_shots_rejected():
    c, nm, p = _random_case(1)
    with pytest.raises(ValueError):
        simulate_experiment(c, nm, [p], shots=0, seed=1, circuit_id=0)


def test_overlapping_batch_rejected():
    c, nm, p = _random_case(2, n=2)
    # Same input twice in one batch: output supports overlap.
    bad = [Batch(members=[0, 1], basis={})]
    with pytest.raises(ValueError):
        simulate_experiment(c, nm, [p, p], shots=10, seed=1, circuit_id=0,
                            batches=bad)


def test_estimates_csv_format():
    c, nm, p = _random_case(3)
    ests = simulate_experiment(c, nm, [p], shots=100, seed=2, circuit_id=4)
    text = estimates_to_csv(ests, nm, {4: c})
    lines = text.strip().split("\n")
    header = lines[0].split(",")
    assert header[0] == "circuit_id"
    assert "lambda_hat" in header and "stderr" in header
    assert "lambda_true" in header
    row = lines[1].split(",")
    assert row[0] == "4"
    lam_true = float(row[header.index("lambda_true")])
    assert abs(lam_true - exact_circuit_eigenvalue(c, nm, p)) < 1e-12
