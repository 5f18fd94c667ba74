"""
Design-matrix assembly, the log-domain least-squares solve, and
conversion of solved eigenvalues to per-gate Pauli error rates.

Row mu of the design matrix counts, for one (circuit, input Pauli) pair,
how many trajectory steps hit each (gate, Pauli) variable nu, so that

    sum_nu A[mu, nu] * x_nu = -ln Lambda_mu,   x_nu = -ln lambda_nu.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .clifford import Circuit, GateIdentity, GateKind, propagate_detailed
from .noise import MEAS_BASES, NoiseModel, rates_from_eigenvalues, tvd
from .pauli import LETTER_TO_CODE, PauliString, label_to_letters
from .simulator import EigenvalueEstimate

# Variable key: (gate noise identity, packed non-identity Pauli label).
# MEAS variables use the basis letter's 1-qubit code as the label.
VarKey = tuple[GateIdentity, int]


@dataclass
class DesignMatrix:
    """Sparse integer occurrence-count matrix with index maps."""

    matrix: scipy.sparse.csr_matrix
    rows: list[tuple[int, PauliString]]  # mu -> (circuit id, input Pauli)
    cols: list[VarKey]  # nu -> (gate identity, Pauli label)
    col_index: dict[VarKey, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.col_index:
            self.col_index = {key: j for j, key in enumerate(self.cols)}

    @property
    def m(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_vars(self) -> int:
        return self.matrix.shape[1]

    def empty_columns(self) -> list[int]:
        counts = np.asarray(self.matrix.sum(axis=0)).ravel()
        return [j for j in range(self.n_vars) if counts[j] == 0]

    def rank(self, tol: float | None = None) -> int:
        dense = self.matrix.toarray().astype(float)
        s = np.linalg.svd(dense, compute_uv=False)
        if tol is None:
            tol = max(self.matrix.shape) * np.finfo(float).eps * (s[0] if s.size else 0)
        return int(np.sum(s > tol))

    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.matrix.toarray().astype(float), compute_uv=False)

    # -- persistence -------------------------------------------------------

    def save(self, matrix_path, rows_path, cols_path) -> None:
        coo = self.matrix.tocoo()
        with open(matrix_path, "w") as f:
            f.write(f"# rows {self.m} cols {self.n_vars}\n")
            order = np.lexsort((coo.col, coo.row))
            for i in order:
                f.write(f"{coo.row[i]} {coo.col[i]} {coo.data[i]}\n")
        with open(rows_path, "w") as f:
            f.write("mu,circuit_id,input_pauli\n")
            for mu, (cid, p) in enumerate(self.rows):
                f.write(f"{mu},{cid},{p}\n")
        with open(cols_path, "w") as f:
            f.write("nu,gate,pauli\n")
            for nu, (g, label) in enumerate(self.cols):
                f.write(f"{nu},{g},{label_to_letters(label, g.k)}\n")


def variable_inventory(circuits: list[Circuit]) -> list[VarKey]:
    """Full variable set: every non-identity Pauli of every gate identity
    appearing in the circuits, plus all three measurement bases per qubit."""
    gate_ids: set[GateIdentity] = set()
    widths = set()
    for c in circuits:
        widths.add(c.n)
        for g in c.gates():
            gate_ids.add(g.noise_id())
    keys: list[VarKey] = []
    for g in sorted(gate_ids, key=str):
        keys.extend((g, label) for label in range(1, 4 ** g.k))
    for q in range(max(widths)):
        for basis in MEAS_BASES:
            meas = GateIdentity(GateKind.MEAS, (q,), basis)
            keys.append((meas, LETTER_TO_CODE[basis]))
    return keys


class InventoryError(KeyError):
    """A trajectory hit a (gate, Pauli) pair absent from a frozen inventory."""


def build_design(
    circuits: list[Circuit],
    inputs: list[list[PauliString]],
    inventory: list[VarKey] | None = None,
) -> DesignMatrix:
    """Count trajectory-step occurrences into the sparse design matrix."""
    if inventory is None:
        frozen = False
        inventory = variable_inventory(circuits)
    else:
        frozen = True
    col_index = {key: j for j, key in enumerate(inventory)}
    rows = []
    data, indices, indptr = [], [], [0]
    for cid, (c, c_inputs) in enumerate(zip(circuits, inputs)):
        for p in c_inputs:
            steps, _ = propagate_detailed(c, p)
            counts: dict[int, int] = {}
            for _, g, label in steps:
                key = (g.noise_id(), label)
                j = col_index.get(key)
                if j is None:
                    if frozen:
                        raise InventoryError(f"variable not in inventory: {key}")
                    continue
                counts[j] = counts.get(j, 0) + 1
            rows.append((cid, p))
            for j in sorted(counts):
                indices.append(j)
                data.append(counts[j])
            indptr.append(len(indices))
    matrix = scipy.sparse.csr_matrix(
        (np.array(data, dtype=np.int64), np.array(indices), np.array(indptr)),
        shape=(len(rows), len(inventory)),
    )
    return DesignMatrix(matrix=matrix, rows=rows, cols=list(inventory))


def null_space_combinations(design: DesignMatrix, top: int = 8) -> list[list[str]]:
    """For a rank-deficient design, describe unidentifiable variable
    combinations: the heaviest entries of each null-space basis vector."""
    dense = design.matrix.toarray().astype(float)
    _, s, vt = np.linalg.svd(dense)
    tol = max(dense.shape) * np.finfo(float).eps * (s[0] if s.size else 0)
    rank = int(np.sum(s > tol))
    combos = []
    for v in vt[rank:]:
        order = np.argsort(-np.abs(v))[:top]
        combos.append(
            [
                f"{design.cols[j][0]}:{label_to_letters(design.cols[j][1], design.cols[j][0].k)}"
                f" ({v[j]:+.3f})"
                for j in order
                if abs(v[j]) > 1e-6
            ]
        )
    return combos


class RankDeficiencyError(RuntimeError):
    def __init__(self, rank: int, n_vars: int, combos):
        super().__init__(f"design matrix rank {rank} < {n_vars} variables")
        self.rank = rank
        self.n_vars = n_vars
        self.unidentifiable = combos


@dataclass
class GateEstimate:
    """Solved eigenvalues and error rates for one gate identity."""

    gate: GateIdentity
    eigenvalues: np.ndarray  # full 4^k vector, lambda_I = 1
    rates: np.ndarray
    truth_eigenvalues: np.ndarray | None = None
    truth_rates: np.ndarray | None = None

    @property
    def tvd(self) -> float | None:
        if self.truth_rates is None:
            return None
        return tvd(self.rates, self.truth_rates)

    def eigenvalue_errors(self) -> np.ndarray | None:
        if self.truth_eigenvalues is None:
            return None
        return np.abs(self.eigenvalues - self.truth_eigenvalues)


@dataclass
class SolveResult:
    estimates: dict[GateIdentity, GateEstimate]
    readout: dict[tuple[int, str], float]  # estimated flip probabilities
    residual_norm: float
    dropped_rows: list[int]
    truncated_vars: int
    negative_rates_clipped: int
    x_hat: np.ndarray
    design: DesignMatrix


LAMBDA_FLOOR = 0.1


def solve(
    design: DesignMatrix,
    estimates: list[EigenvalueEstimate] | np.ndarray,
    truth: NoiseModel | None = None,
    lambda_floor: float = LAMBDA_FLOOR,
    weighted: bool = False,
    check_rank: bool = True,
) -> SolveResult:
    """Truncated least squares in the log domain.

    `estimates` is either a list aligned with the design rows or a raw
    Lambda vector.  Rows with Lambda_hat <= lambda_floor are dropped and
    reported.  Negative solved x are truncated to zero (lambda <= 1);
    reconstructed negative rates are clipped and renormalized.
    """
    if isinstance(estimates, np.ndarray):
        lam_hat = estimates.astype(float)
        weights_se = None
    else:
        if len(estimates) != design.m:
            raise ValueError(f"{len(estimates)} estimates for {design.m} rows")
        lam_hat = np.array([e.lambda_hat for e in estimates])
        weights_se = np.array([max(e.stderr, 1e-12) for e in estimates])
    if check_rank:
        rank = design.rank()
        if rank < design.n_vars:
            raise RankDeficiencyError(
                rank, design.n_vars, null_space_combinations(design)
            )
    keep = lam_hat > lambda_floor
    dropped = [int(i) for i in np.nonzero(~keep)[0]]
    a = design.matrix[keep].astype(float)
    col_hits = np.asarray((a != 0).sum(axis=0)).ravel()
    if np.any(col_hits == 0):
        bad = [str(design.cols[j][0]) for j in np.nonzero(col_hits == 0)[0][:5]]
        raise RuntimeError(f"all rows dropped for variables of: {bad}")
    b = -np.log(lam_hat[keep])
    if weighted and weights_se is not None:
        # inverse-variance weighting of b = -ln Lambda: se_b = se / Lambda
        w = lam_hat[keep] / weights_se[keep]
        a = scipy.sparse.diags(w) @ a
        b = w * b
    if design.n_vars <= 3000 or a.shape[0] * a.shape[1] <= 4_000_000:
        x, *_ = np.linalg.lstsq(a.toarray(), b, rcond=None)
    else:
        x = scipy.sparse.linalg.lsmr(a, b, atol=1e-14, btol=1e-14, maxiter=50 * design.n_vars)[0]
    residual = float(np.linalg.norm(a @ x - b))
    truncated = int(np.sum(x < 0))
    x = np.maximum(x, 0.0)
    lam_nu = np.exp(-x)

    per_gate: dict[GateIdentity, dict[int, float]] = {}
    for (g, label), val in zip(design.cols, lam_nu):
        per_gate.setdefault(g, {})[label] = float(val)
    gate_estimates: dict[GateIdentity, GateEstimate] = {}
    readout: dict[tuple[int, str], float] = {}
    clipped = 0
    for g, lam_map in per_gate.items():
        if g.kind == GateKind.MEAS:
            lam = lam_map[LETTER_TO_CODE[g.basis]]
            readout[(g.qubits[0], g.basis)] = 0.5 * (1.0 - lam)
            continue
        vec = np.ones(4 ** g.k)
        for label, val in lam_map.items():
            vec[label] = val
        channel, flagged = rates_from_eigenvalues(vec)
        clipped += flagged
        est = GateEstimate(gate=g, eigenvalues=vec, rates=channel.rates)
        if truth is not None:
            truth_ch = truth.channel(g)
            est.truth_eigenvalues = truth_ch.eigenvalues()
            est.truth_rates = truth_ch.rates
        gate_estimates[g] = est
    return SolveResult(
        estimates=gate_estimates,
        readout=readout,
        residual_norm=residual,
        dropped_rows=dropped,
        truncated_vars=truncated,
        negative_rates_clipped=clipped,
        x_hat=x,
        design=design,
    )


@dataclass
class Diagnostics:
    rank: int
    n_vars: int
    pseudoinverse_norm: float  # ||A+|| spectral = 1 / smallest kept singular value
    condition_number: float
    residual_norm: float
    dropped_rows: int
    truncated_vars: int
    leverage: np.ndarray | None = None


def diagnostics(design: DesignMatrix, result: SolveResult | None = None,
                with_leverage: bool = False) -> Diagnostics:
    s = design.singular_values()
    tol = max(design.matrix.shape) * np.finfo(float).eps * (s[0] if s.size else 0)
    rank = int(np.sum(s > tol))
    s_kept = s[:rank]
    lev = None
    if with_leverage:
        dense = design.matrix.toarray().astype(float)
        u, _, _ = np.linalg.svd(dense, full_matrices=False)
        lev = np.sum(u[:, :rank] ** 2, axis=1)
    return Diagnostics(
        rank=rank,
        n_vars=design.n_vars,
        pseudoinverse_norm=float(1.0 / s_kept[-1]) if rank else float("inf"),
        condition_number=float(s_kept[0] / s_kept[-1]) if rank else float("inf"),
        residual_norm=result.residual_norm if result else float("nan"),
        dropped_rows=len(result.dropped_rows) if result else 0,
        truncated_vars=result.truncated_vars if result else 0,
        leverage=lev,
    )


def truth_readout_tvds(result: SolveResult, truth: NoiseModel) -> dict[tuple[int, str], float]:
    """|r_hat - r| per (qubit, basis); the TVD of a binary flip channel."""
    return {
        key: abs(r_hat - truth.readout_prob(*key))
        for key, r_hat in result.readout.items()
    }


def per_gate_tvds(result: SolveResult, truth: NoiseModel) -> dict[str, float]:
    """TVD per modeled gate, measurements included (max over their bases)."""
    out = {str(g): est.tvd for g, est in result.estimates.items()}
    meas_err: dict[int, float] = {}
    for (q, basis), err in truth_readout_tvds(result, truth).items():
        meas_err[q] = max(meas_err.get(q, 0.0), err)
    for q, err in meas_err.items():
        out[f"MEAS {q}"] = err
    return out


def solution_to_csv(result: SolveResult, truth: NoiseModel | None = None) -> str:
    header = "gate_id,pauli,lambda_hat,p_hat"
    if truth is not None:
        header += ",lambda_true,p_true,tvd"
    lines = [header]
    for g in sorted(result.estimates, key=str):
        est = result.estimates[g]
        for label in range(1, 4 ** g.k):
            row = (
                f"{g},{label_to_letters(label, g.k)},"
                f"{est.eigenvalues[label]:.12g},{est.rates[label]:.12g}"
            )
            if truth is not None:
                row += (
                    f",{est.truth_eigenvalues[label]:.12g}"
                    f",{est.truth_rates[label]:.12g},{est.tvd:.12g}"
                )
            lines.append(row)
    for (q, basis) in sorted(result.readout):
        r_hat = result.readout[(q, basis)]
        row = f"MEAS {q} {basis},{basis},{1 - 2 * r_hat:.12g},{r_hat:.12g}"
        if truth is not None:
            r_true = truth.readout_prob(q, basis)
            row += f",{1 - 2 * r_true:.12g},{r_true:.12g},{abs(r_hat - r_true):.12g}"
        lines.append(row)
    return "\n".join(lines) + "\n"
