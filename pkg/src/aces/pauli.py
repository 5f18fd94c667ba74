"""
Signed n-qubit Pauli operators with bit-packed symplectic arithmetic.

A Pauli is encoded by two length-n bit vectors packed into Python integers
(bit j of ``x`` / ``z`` refers to qubit j) plus a sign in {+1, -1}:

    P = sign * prod_j X_j^{x_j} Z_j^{z_j}   (hermitian convention)

Phases +/-i never arise: all operations here are closed over hermitian
Paulis conjugated by Cliffords, so a single sign bit suffices.

The per-qubit 2-bit code used for channel indexing is

    I = 0, X = 1, Z = 2, Y = 3    (code = x + 2*z)

and a k-qubit label packs codes little-endian by qubit position:
index = sum_j code_j * 4**j.
"""

from __future__ import annotations

from dataclasses import dataclass

PAULI_LETTERS = "IXZY"  # letter at position `code`
LETTER_TO_CODE = {"I": 0, "X": 1, "Z": 2, "Y": 3}


class PauliDimensionError(ValueError):
    """Raised when two Paulis of different widths are combined."""


@dataclass(frozen=True)
class PauliString:
    """Signed Pauli on n qubits; immutable and hashable."""

    n: int
    x: int  # packed X bits, little-endian by qubit
    z: int  # packed Z bits
    sign: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"need n >= 1, got {self.n}")
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        mask = (1 << self.n) - 1
        if self.x & ~mask or self.z & ~mask:
            raise ValueError("support bits outside qubit range")

    # -- constructors ------------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, 0, 0, 1)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str, sign: int = 1) -> "PauliString":
        """Weight-1 Pauli `letter` acting on `qubit`."""
        code = LETTER_TO_CODE[letter]
        return cls(n, (code & 1) << qubit, (code >> 1) << qubit, sign)

    @classmethod
    def from_codes(cls, n: int, codes: dict[int, int], sign: int = 1) -> "PauliString":
        """Build from a {qubit: code} map."""
        x = z = 0
        for q, c in codes.items():
            x |= (c & 1) << q
            z |= (c >> 1) << q
        return cls(n, x, z, sign)

    @classmethod
    def from_string(cls, text: str) -> "PauliString":
        """Parse e.g. "-XIZ" (leftmost letter is qubit 0)."""
        text = text.strip()
        sign = 1
        if text[:1] in "+-−":
            if text[0] != "+":
                sign = -1
            text = text[1:]
        if not text:
            raise ValueError("empty Pauli string")
        x = z = 0
        for q, ch in enumerate(text):
            try:
                code = LETTER_TO_CODE[ch]
            except KeyError:
                raise ValueError(f"invalid Pauli letter {ch!r}") from None
            x |= (code & 1) << q
            z |= (code >> 1) << q
        return cls(len(text), x, z, sign)

    # -- accessors ---------------------------------------------------------

    def code_at(self, qubit: int) -> int:
        return ((self.x >> qubit) & 1) | (((self.z >> qubit) & 1) << 1)

    def support_mask(self) -> int:
        return self.x | self.z

    def support(self) -> tuple[int, ...]:
        """Qubits where the Pauli acts non-trivially, ascending."""
        mask = self.x | self.z
        qs = []
        while mask:
            low = mask & -mask
            qs.append(low.bit_length() - 1)
            mask ^= low
        return tuple(qs)

    def restrict_codes(self, qubits: tuple[int, ...]) -> int:
        """Packed label of this Pauli restricted to `qubits` (little-endian)."""
        idx = 0
        for j, q in enumerate(qubits):
            idx |= self.code_at(q) << (2 * j)
        return idx

    def with_sign(self, sign: int) -> "PauliString":
        return PauliString(self.n, self.x, self.z, sign)

    def __str__(self) -> str:
        body = "".join(PAULI_LETTERS[self.code_at(q)] for q in range(self.n))
        return ("-" if self.sign < 0 else "") + body

    def __repr__(self) -> str:
        return f"PauliString({str(self)!r})"


def symplectic_inner(a: PauliString, b: PauliString) -> int:
    """Binary symplectic form <a,b>; 1 iff a and b anticommute."""
    if a.n != b.n:
        raise PauliDimensionError(f"width mismatch: {a.n} vs {b.n}")
    return (bin((a.x & b.z) ^ (a.z & b.x)).count("1")) & 1


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Product a*b with support bits XORed.

    The result is reported modulo +/-i: only the input signs are combined.
    Sufficient for Pauli-frame recompilation, where global phase is
    irrelevant.
    """
    if a.n != b.n:
        raise PauliDimensionError(f"width mismatch: {a.n} vs {b.n}")
    return PauliString(a.n, a.x ^ b.x, a.z ^ b.z, a.sign * b.sign)


def weight(a: PauliString) -> int:
    """Number of non-identity tensor factors."""
    return bin(a.x | a.z).count("1")


# -- packed k-qubit labels (PauliIndex) ------------------------------------


def label_weight(label: int, k: int) -> int:
    """Weight of a packed k-qubit label."""
    return sum(1 for j in range(k) if (label >> (2 * j)) & 3)


def label_to_letters(label: int, k: int) -> str:
    return "".join(PAULI_LETTERS[(label >> (2 * j)) & 3] for j in range(k))


def letters_to_label(letters: str) -> int:
    idx = 0
    for j, ch in enumerate(letters):
        idx |= LETTER_TO_CODE[ch] << (2 * j)
    return idx


def label_symplectic(a: int, b: int) -> int:
    """Symplectic form between two packed labels (any common k)."""
    out = 0
    while a or b:
        ca, cb = a & 3, b & 3
        # anticommute iff both non-identity and different
        out ^= 1 if (ca and cb and ca != cb) else 0
        a >>= 2
        b >>= 2
    return out


def embed_label(n: int, qubits: tuple[int, ...], label: int, sign: int = 1) -> PauliString:
    """Place a packed k-qubit label onto `qubits` of an n-qubit Pauli."""
    return PauliString.from_codes(
        n, {q: (label >> (2 * j)) & 3 for j, q in enumerate(qubits)}, sign
    )
