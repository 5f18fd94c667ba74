"""Noisy-Clifford eigenvalue sampling and per-gate Pauli noise estimation."""

from .clifford import Circuit, GateIdentity, GateKind, Trajectory, conjugate_gate, propagate
from .noise import NoiseModel, PauliChannel, eigenvalues_from_rates, rates_from_eigenvalues, tvd
from .pauli import PauliString, multiply, symplectic_inner, weight
from .simulator import EigenvalueEstimate, exact_circuit_eigenvalue, simulate_experiment
from .solver import DesignMatrix, GateEstimate, build_design, diagnostics, solve

__all__ = [
    "Circuit",
    "DesignMatrix",
    "EigenvalueEstimate",
    "GateEstimate",
    "GateIdentity",
    "GateKind",
    "NoiseModel",
    "PauliChannel",
    "PauliString",
    "Trajectory",
    "build_design",
    "conjugate_gate",
    "diagnostics",
    "eigenvalues_from_rates",
    "exact_circuit_eigenvalue",
    "multiply",
    "propagate",
    "rates_from_eigenvalues",
    "simulate_experiment",
    "solve",
    "symplectic_inner",
    "tvd",
    "weight",
]

__version__ = "0.1.0"
