"""Spin operators and radical-pair Hamiltonian construction"""

from .operators import spin_operators, pauli_matrices, embed_operator
from .hamiltonian import (
    GAMMA_E,
    Nucleus,
    SpinSystemSpec,
    FieldSpec,
    CouplingSpec,
    build_hamiltonian,
    dipolar_constant_from_distance,
    mt_to_angular,
)

__all__ = [
    "GAMMA_E",
    "Nucleus",
    "SpinSystemSpec",
    "FieldSpec",
    "CouplingSpec",
    "spin_operators",
    "pauli_matrices",
    "embed_operator",
    "build_hamiltonian",
    "dipolar_constant_from_distance",
    "mt_to_angular",
]
