"""
Experiment circuit ensembles: 1D mirror circuits with random padding,
input-Pauli selection, and Pauli-frame (randomized compiling) sampling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .clifford import (
    DEFAULT_1Q_SET,
    DEFAULT_2Q_SET,
    Circuit,
    GateIdentity,
    GateKind,
    conjugate_gate,
    propagate,
    random_clifford_layers,
)
from .pauli import PauliString, embed_label, multiply, weight


@dataclass(frozen=True)
class ExperimentDesignSpec:
    """Shape of the circuit ensemble for one experiment."""

    n: int
    circuit_count: int
    half_depths: tuple[int, ...]  # mirror half-depths, cycled over circuits
    pad_depth: int = 5
    weight2_fraction: float = 0.5  # fraction of circuits given 2-qubit inputs
    weight_cap: int = 6
    seed: int = 0
    one_q_set: tuple[GateKind, ...] = DEFAULT_1Q_SET
    two_q_set: tuple[GateKind, ...] = DEFAULT_2Q_SET

    def __post_init__(self):
        if self.circuit_count < 1:
            raise ValueError("need at least one circuit")
        if any(d < 1 for d in self.half_depths):
            raise ValueError("half-depths must be >= 1")
        if self.pad_depth < 0:
            raise ValueError("pad_depth must be >= 0")


def geometric_half_depths(d_min: int, d_max: int, count: int) -> tuple[int, ...]:
    """Roughly geometric schedule of half-depths between d_min and d_max."""
    if count == 1:
        return (d_max,)
    xs = np.geomspace(max(d_min, 1), max(d_max, 1), count)
    return tuple(int(round(x)) for x in xs)


def generate_mirror_circuit(
    n: int,
    half_depth: int,
    pad_depth: int,
    rng,
    one_q_set=DEFAULT_1Q_SET,
    two_q_set=DEFAULT_2Q_SET,
) -> Circuit:
    """U U^dagger mirror plus `pad_depth` fresh random layers at the end."""
    if n < 2:
        raise ValueError("need n >= 2")
    half = random_clifford_layers(n, half_depth, rng, one_q_set, two_q_set)
    u = Circuit(n, half)
    layers = half + u.inverse_layers()
    if pad_depth:
        pad_parity = (half_depth // 2) % 2
        layers = layers + random_clifford_layers(
            n, pad_depth, rng, one_q_set, two_q_set, start_parity=pad_parity
        )
    return Circuit(n, layers)


def choose_input_paulis(
    c: Circuit,
    weight2: bool = False,
    weight_cap: int = 6,
) -> list[PauliString]:
    """All weight-1 Paulis, optionally all nearest-neighbor weight-2 ones.

    Inputs whose propagated output exceeds `weight_cap` are dropped: the
    output must stay estimable from single-qubit measurements at
    reasonable cost.
    """
    inputs = []
    for q in range(c.n):
        for letter in "XYZ":
            inputs.append(PauliString.single(c.n, q, letter))
    if weight2:
        for q in range(c.n - 1):
            for la in "XYZ":
                for lb in "XYZ":
                    inputs.append(
                        multiply(
                            PauliString.single(c.n, q, la),
                            PauliString.single(c.n, q + 1, lb),
                        )
                    )
    return [p for p in inputs if weight(propagate(c, p).output) <= weight_cap]


@dataclass(frozen=True)
class CompiledInstance:
    """One Pauli-frame randomization of a base circuit.

    ``pre_frames[t]`` is the merged Pauli applied before layer t (the
    layer's own frame draws times the conjugated frame owed by the
    previous layer); ``final_frame`` is applied before measurement.  The
    instance has the base circuit's layer structure and implements the
    same net unitary.
    """

    base: Circuit
    pre_frames: tuple[PauliString, ...]
    final_frame: PauliString

    def to_text(self) -> str:
        lines = [f"qubits {self.base.n}"]
        for frame, layer in zip(self.pre_frames, self.base.layers):
            lines.append(f"frame {frame}")
            lines.append("; ".join(str(g) for g in layer))
        lines.append(f"frame {self.final_frame}")
        lines.append("measure")
        return "\n".join(lines) + "\n"


def sample_randomized_compiling(c: Circuit, rng) -> CompiledInstance:
    """Draw one randomized-compiled instance of c.

    Each gate gets a uniform Pauli on its support inserted before it and
    the conjugated Pauli after; adjacent frame Paulis are recompiled so a
    single Pauli layer precedes each gate layer.
    """
    owed = PauliString.identity(c.n)  # conjugated frame from the previous layer
    pre_frames = []
    for layer in c.layers:
        drawn = PauliString.identity(c.n)
        for g in layer:
            label = int(rng.integers(4 ** len(g.qubits)))
            drawn = multiply(drawn, embed_label(c.n, g.qubits, label))
        pre_frames.append(multiply(drawn, owed))
        conj = drawn
        for g in layer:
            conj = conjugate_gate(g, conj)
        owed = conj
    return CompiledInstance(base=c, pre_frames=tuple(pre_frames), final_frame=owed)


@dataclass
class GeneratedEnsemble:
    spec: ExperimentDesignSpec
    circuits: list[Circuit]
    inputs: list[list[PauliString]]  # per circuit
    pad_depths: list[int] = field(default_factory=list)


def circuit_rng(seed: int, circuit_index: int):
    """Independent substream for one circuit, schedule-independent."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), 0xC1, circuit_index]))


def generate_ensemble(spec: ExperimentDesignSpec) -> GeneratedEnsemble:
    """Generate the configured circuits and their input Paulis."""
    circuits = []
    inputs = []
    pads = []
    for i in range(spec.circuit_count):
        rng = circuit_rng(spec.seed, i)
        half = spec.half_depths[i % len(spec.half_depths)]
        c = generate_mirror_circuit(
            spec.n, half, spec.pad_depth, rng, spec.one_q_set, spec.two_q_set
        )
        use_w2 = (i + 1) <= round(spec.weight2_fraction * spec.circuit_count)
        circuits.append(c)
        inputs.append(choose_input_paulis(c, weight2=use_w2, weight_cap=spec.weight_cap))
        pads.append(spec.pad_depth)
    return GeneratedEnsemble(spec, circuits, inputs, pads)


def extend_ensemble(ens: GeneratedEnsemble, extra: int, pad_depth: int) -> GeneratedEnsemble:
    """Add `extra` fresh circuits (used by the rank-retry loop)."""
    spec = ens.spec
    start = len(ens.circuits)
    for j in range(extra):
        i = start + j
        rng = circuit_rng(spec.seed, i)
        half = spec.half_depths[i % len(spec.half_depths)]
        c = generate_mirror_circuit(
            spec.n, half, pad_depth, rng, spec.one_q_set, spec.two_q_set
        )
        use_w2 = spec.weight2_fraction > 0
        ens.circuits.append(c)
        ens.inputs.append(choose_input_paulis(c, weight2=use_w2, weight_cap=spec.weight_cap))
        ens.pad_depths.append(pad_depth)
    return ens
