"""
Circuit-eigenvalue data: an exact product-formula oracle and a shot-level
Monte Carlo sampler of eigenvalue-sampling experiments.

The sampler is exact for Pauli noise: per shot, each gate draws one error
Pauli from its channel, and a tracked Pauli's sign flips whenever the
drawn error anticommutes with the Pauli entering that gate.  All tracked
Paulis in a batch share the shot's error realization.  Since flips per
gate are rare at realistic error rates, positions of flip events along
the shot axis are drawn by geometric skip-sampling (an exact sampling of
the Bernoulli process), so cost scales with the number of events rather
than shots x gates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clifford import Circuit, GateIdentity, GateKind, propagate_detailed
from .noise import NoiseModel
from .pauli import PAULI_LETTERS, PauliString, label_symplectic

# anti[k][e, a] = 1 iff packed k-qubit labels e and a anticommute
ANTI = {
    k: np.array(
        [[label_symplectic(e, a) for a in range(4 ** k)] for e in range(4 ** k)],
        dtype=np.uint8,
    )
    for k in (1, 2)
}


@dataclass(frozen=True)
class EigenvalueEstimate:
    """Sampled estimate of one circuit eigenvalue."""

    circuit_id: int
    input: PauliString
    output: PauliString
    shots: int
    lambda_hat: float
    stderr: float
    plus_count: int
    minus_count: int
    sign_convention: int  # ideal propagation sign folded out of lambda_hat


def exact_circuit_eigenvalue(c: Circuit, nm: NoiseModel, p_in: PauliString) -> float:
    """Product of per-step channel eigenvalues along the trajectory."""
    steps, _ = propagate_detailed(c, p_in)
    lam = 1.0
    for _, g, label in steps:
        lam *= nm.step_eigenvalue(g, label)
    return lam


@dataclass
class Batch:
    """Inputs measured simultaneously under one basis assignment."""

    members: list[int]  # indices into the input list
    basis: dict[int, str]  # qubit -> measured Pauli letter


def batch_inputs(c: Circuit, inputs: list[PauliString], outputs=None) -> list[Batch]:
    """Greedy packing of inputs with disjoint-support outputs.

    Every input lands in exactly one batch; the batch's basis assignment
    is the union of its members' single-qubit output letters.
    """
    if outputs is None:
        outputs = [propagate_detailed(c, p)[1] for p in inputs]
    batches: list[Batch] = []
    masks: list[int] = []
    for i, out in enumerate(outputs):
        m = out.support_mask()
        for j, used in enumerate(masks):
            if not (m & used):
                batches[j].members.append(i)
                masks[j] |= m
                break
        else:
            batches.append(Batch(members=[i], basis={}))
            masks.append(m)
    for b in batches:
        for i in b.members:
            out = outputs[i]
            for q in out.support():
                b.basis[q] = PAULI_LETTERS[out.code_at(q)]
    return batches


def _event_positions(rng, p: float, shots: int) -> np.ndarray:
    """Positions of successes in `shots` Bernoulli(p) trials (exact)."""
    if p <= 0.0:
        return np.empty(0, dtype=np.int64)
    if p >= 1.0:
        return np.arange(shots, dtype=np.int64)
    chunks = []
    last = -1  # 0-based position of the most recent event
    while last < shots:
        expect = max(16, int(shots * p * 1.2 + 8 * np.sqrt(shots * p + 1)))
        gaps = rng.geometric(p, size=expect)
        pos = np.cumsum(gaps) + last
        chunks.append(pos)
        last = int(pos[-1])
    out = np.concatenate(chunks) if len(chunks) > 1 else chunks[0]
    return out[out < shots]


@dataclass
class _Occurrence:
    """One noisy element shared by the batch members it touches."""

    event_prob: float  # P(at least one tracked Pauli flips)
    cond_cdf: np.ndarray  # cdf over flip-relevant channel outcomes
    member_rows: list[int]  # rows of `parity` to update
    bits: np.ndarray  # (n_outcomes, n_members) flip bits per outcome


def _plan_batch(c, nm, inputs, trajectories, batch) -> tuple[list[_Occurrence], int]:
    """Build per-occurrence event distributions for one batch."""
    touch: dict[tuple[int, GateIdentity], list[tuple[int, int]]] = {}
    readout: list[tuple[int, float]] = []
    for row, i in enumerate(batch.members):
        for layer_idx, g, label in trajectories[i]:
            if g.kind == GateKind.MEAS:
                r = nm.readout_prob(g.qubits[0], g.basis)
                readout.append((row, r))
            else:
                touch.setdefault((layer_idx, g), []).append((row, label))
    occs = []
    for key in sorted(touch, key=lambda kg: (kg[0], kg[1].qubits, str(kg[1]))):
        members = touch[key]
        g = key[1]
        rates = nm.channel(g).rates
        k = g.k
        anti = ANTI[k]
        labels = [lbl for _, lbl in members]
        bits = anti[:, labels]  # (4^k, m)
        relevant = bits.any(axis=1) & (rates > 0)
        p_event = float(rates[relevant].sum())
        if p_event <= 0.0:
            continue
        cond = rates[relevant] / p_event
        occs.append(
            _Occurrence(
                event_prob=p_event,
                cond_cdf=np.cumsum(cond),
                member_rows=[row for row, _ in members],
                bits=bits[relevant],
            )
        )
    for row, r in readout:
        if r > 0.0:
            occs.append(
                _Occurrence(
                    event_prob=float(r),
                    cond_cdf=np.ones(1),
                    member_rows=[row],
                    bits=np.ones((1, 1), dtype=np.uint8),
                )
            )
    return occs, len(batch.members)


def _run_batch(occs, n_members, shots, rng):
    """Simulate one batch; returns per-member (lambda_hat, stderr, n_plus, n_minus)."""
    parity = np.zeros((n_members, shots), dtype=np.uint8)
    for occ in occs:
        pos = _event_positions(rng, occ.event_prob, shots)
        if pos.size == 0:
            continue
        if occ.cond_cdf.size == 1:
            idx = np.zeros(pos.size, dtype=np.intp)
        else:
            idx = np.searchsorted(occ.cond_cdf, rng.random(pos.size), side="right")
            idx = np.minimum(idx, occ.cond_cdf.size - 1)
        for j, row in enumerate(occ.member_rows):
            sel = pos[occ.bits[idx, j] == 1]
            parity[row, sel] ^= 1
    prep = rng.integers(0, 2, size=(n_members, shots), dtype=np.uint8)
    results = []
    for row in range(n_members):
        s = prep[row]
        par = parity[row]
        n_minus = int(s.sum())
        n_plus = shots - n_minus
        odd_plus = int(np.count_nonzero(par & (s ^ 1)))
        odd_minus = int(np.count_nonzero(par & s))
        mean_plus = (n_plus - 2 * odd_plus) / n_plus if n_plus else None
        # minus-prepared shots measure -(-1)^parity
        mean_minus = -(n_minus - 2 * odd_minus) / n_minus if n_minus else None
        if mean_plus is None:
            lam, var = -mean_minus, 1 - mean_minus ** 2
            se = np.sqrt(max(var, 0.0) / shots)
        elif mean_minus is None:
            lam, var = mean_plus, 1 - mean_plus ** 2
            se = np.sqrt(max(var, 0.0) / shots)
        else:
            lam = 0.5 * (mean_plus - mean_minus)
            se = 0.5 * np.sqrt(
                max(1 - mean_plus ** 2, 0.0) / n_plus
                + max(1 - mean_minus ** 2, 0.0) / n_minus
            )
        results.append((float(lam), float(se), n_plus, n_minus))
    return results


def shot_rng(seed: int, circuit_id: int, shots: int, batch_idx: int):
    """Labeled substream: independent of worker scheduling."""
    return np.random.default_rng(
        np.random.SeedSequence([int(seed), 0x5B, circuit_id, shots, batch_idx])
    )


def simulate_experiment(
    c: Circuit,
    nm: NoiseModel,
    inputs: list[PauliString],
    shots: int,
    seed: int,
    circuit_id: int = 0,
    batches: list[Batch] | None = None,
) -> list[EigenvalueEstimate]:
    """Eigenvalue-sampling experiment for all inputs on one circuit.

    Inputs are packed into simultaneous-measurement batches; each batch
    runs `shots` shots with shared error realizations, random +/- input
    eigenstate preparation, per-qubit readout flips, and the differenced
    estimator.  Deterministic in (seed, circuit_id, shots).
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    details = [propagate_detailed(c, p) for p in inputs]
    trajectories = [steps for steps, _ in details]
    outputs = [out for _, out in details]
    if batches is None:
        batches = batch_inputs(c, inputs, outputs)
    else:
        for b in batches:
            seen = 0
            for i in b.members:
                m = outputs[i].support_mask()
                if m & seen:
                    raise ValueError("batch members have overlapping output supports")
                seen |= m
    estimates: list[EigenvalueEstimate | None] = [None] * len(inputs)
    for batch_idx, batch in enumerate(batches):
        occs, n_members = _plan_batch(c, nm, inputs, trajectories, batch)
        rng = shot_rng(seed, circuit_id, shots, batch_idx)
        results = _run_batch(occs, n_members, shots, rng)
        for row, i in enumerate(batch.members):
            lam, se, n_plus, n_minus = results[row]
            estimates[i] = EigenvalueEstimate(
                circuit_id=circuit_id,
                input=inputs[i],
                output=outputs[i].with_sign(1),
                shots=shots,
                lambda_hat=lam,
                stderr=se,
                plus_count=n_plus,
                minus_count=n_minus,
                sign_convention=outputs[i].sign,
            )
    return estimates


def estimates_to_csv(estimates: list[EigenvalueEstimate], nm: NoiseModel | None = None,
                     circuits: dict[int, Circuit] | None = None) -> str:
    """Render estimates as CSV; adds a lambda_true column when a ground
    truth model (and the circuits) are available."""
    have_truth = nm is not None and circuits is not None
    header = "circuit_id,input_pauli,output_pauli,shots,lambda_hat,stderr"
    if have_truth:
        header += ",lambda_true"
    lines = [header]
    for e in estimates:
        row = (
            f"{e.circuit_id},{e.input},{e.output},{e.shots},"
            f"{e.lambda_hat:.12g},{e.stderr:.12g}"
        )
        if have_truth:
            lam = exact_circuit_eigenvalue(circuits[e.circuit_id], nm, e.input)
            row += f",{lam:.12g}"
        lines.append(row)
    return "\n".join(lines) + "\n"
