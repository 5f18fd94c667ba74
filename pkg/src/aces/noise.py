"""
Pauli channels, the rate/eigenvalue transform, and device noise models.

Rates p and eigenvalues lambda are Walsh-Hadamard duals under the
symplectic character (-1)^<a,b>:

    lambda_b = sum_a (-1)^<a,b> p_a
    p_a      = (1/4^k) sum_b (-1)^<a,b> lambda_b

The inverse prefactor is 1/4^k over the full 2k-bit index set (the
symplectic form is non-degenerate, so the double sum gives 4^k * delta);
the round-trip test pins this normalization.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .clifford import GateIdentity, GateKind

# Per-qubit character matrix F[b, a] = (-1)^<a,b> in code order I,X,Z,Y.
# Symmetric and F @ F = 4 I.
_F1 = np.array(
    [
        [1, 1, 1, 1],
        [1, 1, -1, -1],
        [1, -1, 1, -1],
        [1, -1, -1, 1],
    ],
    dtype=float,
)

RATE_SUM_TOL = 1e-12


def symplectic_transform(v: np.ndarray, k: int) -> np.ndarray:
    """Apply the 4^k character transform as a tensor-structured butterfly.

    O(4^k * k) radix-4 stages, one per qubit axis.
    """
    if v.shape != (4 ** k,):
        raise ValueError(f"expected length {4 ** k}, got {v.shape}")
    out = v.reshape((4,) * k).astype(float)
    for axis in range(k):
        out = np.tensordot(_F1, out, axes=([1], [axis]))
        out = np.moveaxis(out, 0, axis)
    return out.reshape(4 ** k)


@dataclass(frozen=True)
class PauliChannel:
    """Stochastic Pauli channel on k qubits, stored as its rate vector."""

    k: int
    rates: np.ndarray = field(repr=False)

    def __post_init__(self):
        r = np.asarray(self.rates, dtype=float)
        object.__setattr__(self, "rates", r)
        if r.shape != (4 ** self.k,):
            raise ValueError(f"need 4^{self.k} rates, got shape {r.shape}")
        if np.any(r < -RATE_SUM_TOL):
            raise ValueError("negative Pauli error rate")
        if abs(r.sum() - 1.0) > 1e-9:
            raise ValueError(f"rates sum to {r.sum()}, not 1")
        r.flags.writeable = False

    @classmethod
    def identity(cls, k: int) -> "PauliChannel":
        r = np.zeros(4 ** k)
        r[0] = 1.0
        return cls(k, r)

    @classmethod
    def depolarizing(cls, k: int, total_error: float) -> "PauliChannel":
        r = np.full(4 ** k, total_error / (4 ** k - 1))
        r[0] = 1.0 - total_error
        return cls(k, r)

    def eigenvalues(self) -> np.ndarray:
        cached = getattr(self, "_eig", None)
        if cached is None:
            cached = eigenvalues_from_rates(self)
            cached.flags.writeable = False
            object.__setattr__(self, "_eig", cached)
        return cached

    def fidelity(self) -> float:
        return float(self.rates[0])


def eigenvalues_from_rates(ch: PauliChannel) -> np.ndarray:
    """lambda_b = sum_a (-1)^<a,b> p_a for all 4^k labels b."""
    return symplectic_transform(ch.rates, ch.k)


def rates_from_eigenvalues(lam: np.ndarray, negative_tol: float = 1e-9):
    """Inverse transform; returns (PauliChannel, flagged_negative_count).

    Requires lambda_I = 1.  Rates below -negative_tol are counted but not
    rejected; all negatives are clipped to zero and the vector
    renormalized so the result is a valid channel.
    """
    lam = np.asarray(lam, dtype=float)
    k = int(round(np.log2(lam.size) / 2))
    if lam.size != 4 ** k:
        raise ValueError(f"length {lam.size} is not a power of 4")
    if abs(lam[0] - 1.0) > 1e-9:
        raise ValueError(f"lambda_I = {lam[0]}, expected 1")
    rates = symplectic_transform(lam, k) / 4 ** k
    flagged = int(np.sum(rates < -negative_tol))
    if np.any(rates < 0):
        rates = np.clip(rates, 0.0, None)
        rates = rates / rates.sum()
    return PauliChannel(k, rates), flagged


def tvd(p: np.ndarray, q: np.ndarray) -> float:
    """Total variation distance, half the l1 distance."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"shape mismatch: {p.shape} vs {q.shape}")
    return 0.5 * float(np.abs(p - q).sum())


MEAS_BASES = ("X", "Y", "Z")

DEFAULT_ERROR_RANGES = {
    "single": (0.0005, 0.002),
    "two": (0.004, 0.01),
    "readout": (0.01, 0.03),
}


def gate_class(g: GateIdentity) -> str:
    if g.kind == GateKind.MEAS:
        return "readout"
    return "single" if g.k == 1 else "two"


@dataclass
class NoiseModel:
    """Per-gate Pauli channels plus per-(qubit, basis) readout flips.

    Channels are keyed by noise identity (``GateIdentity.noise_id``);
    lookups collapse dagger kinds automatically.
    """

    gate_noise: dict[GateIdentity, PauliChannel]
    readout: dict[tuple[int, str], float]

    def channel(self, g: GateIdentity) -> PauliChannel:
        return self.gate_noise[g.noise_id()]

    def readout_prob(self, qubit: int, basis: str) -> float:
        return self.readout[(qubit, basis)]

    def step_eigenvalue(self, g: GateIdentity, label: int) -> float:
        """Channel eigenvalue seen by a trajectory step (gate or MEAS)."""
        if g.kind == GateKind.MEAS:
            return 1.0 - 2.0 * self.readout_prob(g.qubits[0], g.basis)
        return float(self.channel(g).eigenvalues()[label])

    # -- persistence -------------------------------------------------------

    def to_dict(self) -> dict:
        gates = {str(g): list(ch.rates) for g, ch in sorted(
            self.gate_noise.items(), key=lambda kv: str(kv[0]))}
        readout = {f"MEAS {q} {b}": r for (q, b), r in sorted(self.readout.items())}
        return {"gates": gates, "readout": readout}

    def save(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=1)
            f.write("\n")

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseModel":
        gate_noise = {}
        for key, rates in d["gates"].items():
            g = GateIdentity.parse(key)
            gate_noise[g] = PauliChannel(g.k, np.array(rates, dtype=float))
        readout = {}
        for key, r in d["readout"].items():
            toks = key.split()
            readout[(int(toks[1]), toks[2])] = float(r)
        return cls(gate_noise, readout)

    @classmethod
    def load(cls, path) -> "NoiseModel":
        with open(path) as f:
            return cls.from_dict(json.load(f))


def noiseless_model(gates, qubits) -> NoiseModel:
    gate_noise = {g.noise_id(): PauliChannel.identity(g.k) for g in gates}
    readout = {(q, b): 0.0 for q in qubits for b in MEAS_BASES}
    return NoiseModel(gate_noise, readout)


def random_noise_model(gates, qubits, ranges=None, seed=0) -> NoiseModel:
    """Draw a ground-truth model for a gate inventory.

    For each gate a total error in the class interval is split over the
    non-identity Paulis by normalized uniform draws; readout flip
    probabilities are drawn per qubit per basis.  Deterministic in `seed`.
    """
    ranges = dict(DEFAULT_ERROR_RANGES, **(ranges or {}))
    for lo, hi in ranges.values():
        if lo < 0 or hi >= 1 or hi < lo:
            raise ValueError(f"invalid error interval ({lo}, {hi})")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x4E]))
    gate_noise = {}
    for g in sorted({g.noise_id() for g in gates}, key=str):
        lo, hi = ranges[gate_class(g)]
        eps = rng.uniform(lo, hi)
        if eps == 0.0:
            gate_noise[g] = PauliChannel.identity(g.k)
            continue
        split = rng.uniform(size=4 ** g.k - 1)
        split = split / split.sum() * eps
        rates = np.concatenate(([1.0 - eps], split))
        gate_noise[g] = PauliChannel(g.k, rates)
    lo, hi = ranges["readout"]
    readout = {
        (q, b): float(rng.uniform(lo, hi)) for q in sorted(qubits) for b in MEAS_BASES
    }
    return NoiseModel(gate_noise, readout)
