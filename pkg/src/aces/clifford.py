"""
Clifford gate kinds, circuits, and signed Pauli conjugation.

Gate kinds are defined by constant signed-permutation tables on packed
Pauli labels (see :mod:`aces.pauli` for the code ordering I=0, X=1, Z=2,
Y=3).  The single-qubit kinds cover all six single-qubit Cliffords modulo
Paulis, one representative per axis permutation, plus the exact inverses
needed to build mirror circuits:

    I   identity            H       X<->Z swap
    S   X<->Y swap          SX      Z<->Y swap (sqrt-X class)
    HS  X->Y->Z->X cycle    HS_DAG  the inverse cycle

S_DAG and SX_DAG are the exact inverses of S and SX.  Since S_DAG = S*Z
and SX_DAG = SX*X (up to phase), each dagger kind is the same physical
gate as its base kind modulo a free Pauli frame; ``noise_kind`` collapses
the daggers so noise variables are keyed per coset, six per qubit.

The tables are verified at import time against dense 2x2 / 4x4 matrix
conjugation, so a corrupted table cannot load.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .pauli import PAULI_LETTERS, PauliString, embed_label, label_to_letters


class GateKind(Enum):
    I = "I"
    H = "H"
    S = "S"
    S_DAG = "S_DAG"
    SX = "SX"
    SX_DAG = "SX_DAG"
    HS = "HS"
    HS_DAG = "HS_DAG"
    CX = "CX"
    CZ = "CZ"
    MEAS = "MEAS"

    @property
    def arity(self) -> int:
        return 2 if self in (GateKind.CX, GateKind.CZ) else 1


# Signed permutation of packed labels under conjugation: entry `label` is
# (new_label, sign).  Labels are little-endian by qubit position within
# the gate's qubit tuple; for CX, position 0 is the control.
ACTION_TABLES: dict[GateKind, tuple[tuple[int, int], ...]] = {
    GateKind.I: ((0, 1), (1, 1), (2, 1), (3, 1)),
    GateKind.H: ((0, 1), (2, 1), (1, 1), (3, -1)),
    GateKind.S: ((0, 1), (3, 1), (2, 1), (1, -1)),
    GateKind.S_DAG: ((0, 1), (3, -1), (2, 1), (1, 1)),
    GateKind.SX: ((0, 1), (1, 1), (3, -1), (2, 1)),
    GateKind.SX_DAG: ((0, 1), (1, 1), (3, 1), (2, -1)),
    GateKind.HS: ((0, 1), (3, -1), (1, 1), (2, -1)),
    GateKind.HS_DAG: ((0, 1), (2, 1), (3, -1), (1, -1)),
    GateKind.CX: ((0, 1), (5, 1), (2, 1), (7, 1), (4, 1), (1, 1), (6, 1), (3, 1),
                  (10, 1), (15, -1), (8, 1), (13, 1), (14, 1), (11, 1), (12, 1), (9, -1)),
    GateKind.CZ: ((0, 1), (9, 1), (2, 1), (11, 1), (6, 1), (15, 1), (4, 1), (13, -1),
                  (8, 1), (1, 1), (10, 1), (3, 1), (14, 1), (7, -1), (12, 1), (5, 1)),
}

INVERSE_KIND = {
    GateKind.I: GateKind.I,
    GateKind.H: GateKind.H,
    GateKind.S: GateKind.S_DAG,
    GateKind.S_DAG: GateKind.S,
    GateKind.SX: GateKind.SX_DAG,
    GateKind.SX_DAG: GateKind.SX,
    GateKind.HS: GateKind.HS_DAG,
    GateKind.HS_DAG: GateKind.HS,
    GateKind.CX: GateKind.CX,
    GateKind.CZ: GateKind.CZ,
}

# Canonical representative of each kind modulo Pauli frame; noise
# variables are keyed by this, giving six single-qubit classes.
NOISE_KIND = {
    GateKind.S_DAG: GateKind.S,
    GateKind.SX_DAG: GateKind.SX,
}

SINGLE_QUBIT_KINDS = tuple(k for k in GateKind if k.arity == 1 and k != GateKind.MEAS)
# The six coset representatives used as the default random gate set.
DEFAULT_1Q_SET = (GateKind.I, GateKind.H, GateKind.S, GateKind.SX, GateKind.HS, GateKind.HS_DAG)
DEFAULT_2Q_SET = (GateKind.CX,)


@dataclass(frozen=True)
class GateIdentity:
    """A gate kind placed on an ordered qubit tuple.

    ``basis`` is set only for MEAS pseudo-gates (one of "X","Y","Z").
    ``context`` distinguishes correlated-group variants: a single-qubit
    kind with a 2-qubit tuple and a context tag denotes a composite gate
    (the kind applied to each qubit) carrying a joint noise variable.
    """

    kind: GateKind
    qubits: tuple[int, ...]
    basis: str | None = None
    context: str | None = None

    def __post_init__(self):
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"repeated qubits in {self}")
        if self.kind == GateKind.MEAS:
            if self.basis not in ("X", "Y", "Z") or len(self.qubits) != 1:
                raise ValueError("MEAS needs one qubit and a basis in X/Y/Z")
        elif self.basis is not None:
            raise ValueError("basis only valid for MEAS")
        elif self.kind.arity == 2 and len(self.qubits) != 2:
            raise ValueError(f"{self.kind} needs two qubits")
        elif self.kind.arity == 1 and len(self.qubits) != 1 and self.context is None:
            raise ValueError("multi-qubit single-kind gates need a context tag")

    @property
    def k(self) -> int:
        """Support size of the gate's noise channel."""
        return len(self.qubits)

    def noise_id(self) -> "GateIdentity":
        """Identity used for noise variables: daggers collapse to their coset."""
        nk = NOISE_KIND.get(self.kind, self.kind)
        if nk is self.kind:
            return self
        return GateIdentity(nk, self.qubits, self.basis, self.context)

    def inverse(self) -> "GateIdentity":
        return GateIdentity(INVERSE_KIND[self.kind], self.qubits, self.basis, self.context)

    def support_mask(self) -> int:
        m = 0
        for q in self.qubits:
            m |= 1 << q
        return m

    def __str__(self) -> str:
        parts = [self.kind.value, *map(str, self.qubits)]
        if self.basis:
            parts.append(self.basis)
        if self.context:
            parts.append(f"@{self.context}")
        return " ".join(parts)

    @classmethod
    def parse(cls, text: str) -> "GateIdentity":
        toks = text.split()
        context = None
        if toks and toks[-1].startswith("@"):
            context = toks[-1][1:]
            toks = toks[:-1]
        kind = GateKind(toks[0])
        if kind == GateKind.MEAS:
            return cls(kind, (int(toks[1]),), toks[2], context)
        return cls(kind, tuple(int(t) for t in toks[1:]), None, context)


def gate_action(g: GateIdentity, label: int) -> tuple[int, int]:
    """(new_label, sign) of conjugating the packed label through g."""
    kind = g.kind
    if kind.arity == 2:
        return ACTION_TABLES[kind][label]
    table = ACTION_TABLES[kind]
    out = 0
    sign = 1
    for j in range(len(g.qubits)):
        nl, s = table[(label >> (2 * j)) & 3]
        out |= nl << (2 * j)
        sign *= s
    return out, sign


def conjugate_gate(g: GateIdentity, p: PauliString) -> PauliString:
    """Conjugate p through the gate: returns G p G^dagger with exact sign."""
    if g.kind == GateKind.MEAS:
        raise ValueError("cannot conjugate through MEAS")
    for q in g.qubits:
        if q >= p.n:
            raise ValueError(f"qubit {q} out of range for width {p.n}")
    label = p.restrict_codes(g.qubits)
    new_label, sign = gate_action(g, label)
    codes = {q: p.code_at(q) for q in range(p.n)}
    for j, q in enumerate(g.qubits):
        codes[q] = (new_label >> (2 * j)) & 3
    return PauliString.from_codes(p.n, codes, p.sign * sign)


@dataclass(frozen=True)
class Circuit:
    """Layered Clifford circuit with a terminal all-qubit measurement."""

    n: int
    layers: tuple[tuple[GateIdentity, ...], ...]

    def __post_init__(self):
        for layer in self.layers:
            seen = 0
            for g in layer:
                if g.kind == GateKind.MEAS:
                    raise ValueError("MEAS not allowed inside layers")
                m = g.support_mask()
                if m & seen:
                    raise ValueError("overlapping gate supports within a layer")
                if m >> self.n:
                    raise ValueError("gate qubit outside circuit width")
                seen |= m

    @property
    def depth(self) -> int:
        return len(self.layers)

    def gates(self):
        for layer in self.layers:
            yield from layer

    def inverse_layers(self) -> tuple[tuple[GateIdentity, ...], ...]:
        """Layers of the exact inverse circuit."""
        return tuple(tuple(g.inverse() for g in layer) for layer in reversed(self.layers))

    # -- text format -------------------------------------------------------

    def to_text(self) -> str:
        lines = [f"qubits {self.n}"]
        for layer in self.layers:
            lines.append("; ".join(str(g) for g in layer))
        lines.append("measure")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Circuit":
        lines = [ln.strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln and not ln.startswith("#")]
        if not lines or not lines[0].startswith("qubits "):
            raise ValueError("missing 'qubits N' header")
        n = int(lines[0].split()[1])
        if lines[-1] != "measure":
            raise ValueError("missing terminal 'measure' line")
        layers = []
        for ln in lines[1:-1]:
            layers.append(tuple(GateIdentity.parse(tok) for tok in ln.split(";")))
        return cls(n, tuple(layers))


@dataclass(frozen=True)
class Trajectory:
    """Per-gate Pauli history of one input propagated through a circuit.

    Each step is (gate, packed label of the Pauli restricted to the gate's
    support as it enters the gate).  Terminal MEAS steps carry one entry
    per qubit in the output support, labeled by the single-qubit letter
    there.  Only gates whose support intersects the propagating Pauli are
    recorded; an intersecting gate never has an identity restricted label.
    """

    input: PauliString
    steps: tuple[tuple[GateIdentity, int], ...]
    output: PauliString


def propagate_detailed(c: Circuit, p: PauliString):
    """Like :func:`propagate`, with per-step layer indices.

    Returns (steps, output) where gate steps are (layer_index, gate,
    label) and terminal MEAS steps use layer_index = depth.
    """
    if p.n != c.n:
        raise ValueError(f"width mismatch: Pauli {p.n} vs circuit {c.n}")
    cur_x, cur_z, sign = p.x, p.z, p.sign
    steps: list[tuple[int, GateIdentity, int]] = []
    for layer_idx, layer in enumerate(c.layers):
        support = cur_x | cur_z
        for g in layer:
            gm = g.support_mask()
            if not (gm & support):
                continue
            label = 0
            new_x = cur_x
            new_z = cur_z
            for j, q in enumerate(g.qubits):
                label |= (((cur_x >> q) & 1) | (((cur_z >> q) & 1) << 1)) << (2 * j)
            steps.append((layer_idx, g, label))
            new_label, s = gate_action(g, label)
            for j, q in enumerate(g.qubits):
                bit = 1 << q
                new_x = (new_x & ~bit) | ((new_label >> (2 * j)) & 1) << q
                new_z = (new_z & ~bit) | ((new_label >> (2 * j + 1)) & 1) << q
            cur_x, cur_z = new_x, new_z
            sign *= s
    out = PauliString(c.n, cur_x, cur_z, sign)
    for q in out.support():
        basis = PAULI_LETTERS[out.code_at(q)]
        steps.append((len(c.layers), GateIdentity(GateKind.MEAS, (q,), basis), out.code_at(q)))
    return steps, out


def propagate(c: Circuit, p: PauliString) -> Trajectory:
    """Conjugate p layer by layer, recording the per-gate Pauli history."""
    steps, out = propagate_detailed(c, p)
    return Trajectory(input=p, steps=tuple((g, lbl) for _, g, lbl in steps), output=out)


# -- import-time verification of the action tables -------------------------


def _dense_check():
    import numpy as np

    i2 = np.eye(2)
    x = np.array([[0, 1], [1, 0]], complex)
    z = np.array([[1, 0], [0, -1]], complex)
    y = 1j * x @ z
    p1 = [i2, x, z, y]
    h = np.array([[1, 1], [1, -1]], complex) / np.sqrt(2)
    s = np.diag([1, 1j])
    sx = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]])
    mats = {
        GateKind.I: np.eye(2, dtype=complex),
        GateKind.H: h,
        GateKind.S: s,
        GateKind.S_DAG: s.conj().T,
        GateKind.SX: sx,
        GateKind.SX_DAG: sx.conj().T,
        GateKind.HS: h @ s,
        GateKind.HS_DAG: (h @ s).conj().T,
        GateKind.CX: np.array(
            [[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], complex
        ),  # control = low bit (position 0)
        GateKind.CZ: np.diag([1, 1, 1, -1]).astype(complex),
    }

    def pauli_mat(label, k):
        m = np.eye(1)
        for j in range(k):
            m = np.kron(p1[(label >> (2 * j)) & 3], m)  # position j = low bit
        return m

    for kind, table in ACTION_TABLES.items():
        k = kind.arity
        u = mats[kind]
        for label, (nl, sg) in enumerate(table):
            got = u @ pauli_mat(label, k) @ u.conj().T
            want = sg * pauli_mat(nl, k)
            if not np.allclose(got, want, atol=1e-12):
                raise AssertionError(f"action table corrupt for {kind} label {label}")
        # signed permutation: bijection on non-identity labels, identity fixed
        assert table[0] == (0, 1)
        assert sorted(nl for nl, _ in table) == list(range(4 ** k))


_dense_check()
del _dense_check


def all_layer_pairings(n: int, parity: int) -> list[tuple[int, int]]:
    """Nearest-neighbor 1D bonds (q, q+1) with q of the given parity."""
    return [(q, q + 1) for q in range(parity, n - 1, 2)]


def random_clifford_layers(
    n: int,
    depth: int,
    rng,
    one_q_set=DEFAULT_1Q_SET,
    two_q_set=DEFAULT_2Q_SET,
    start_parity: int = 0,
):
    """Alternating 1q / 2q brickwork layers; depth counts both kinds."""
    layers = []
    parity = start_parity
    for t in range(depth):
        if t % 2 == 0:
            layer = tuple(
                GateIdentity(one_q_set[rng.integers(len(one_q_set))], (q,))
                for q in range(n)
            )
        else:
            gates = []
            for a, b in all_layer_pairings(n, parity):
                kind = two_q_set[rng.integers(len(two_q_set))]
                if kind == GateKind.CX and rng.integers(2):
                    a, b = b, a
                gates.append(GateIdentity(kind, (a, b)))
            layer = tuple(gates)
            parity ^= 1
        layers.append(layer)
    return tuple(layers)


def iter_gate_paulis(g: GateIdentity):
    """Non-identity packed labels for a gate's support size."""
    return range(1, 4 ** g.k)


def composite_pair(kind: GateKind, qubits: tuple[int, int], context: str) -> GateIdentity:
    """Correlated-group composite: `kind` on each of two qubits, one joint variable."""
    if kind.arity != 1 or kind == GateKind.MEAS:
        raise ValueError("composite groups are built from single-qubit kinds")
    return GateIdentity(kind, qubits, None, context)
