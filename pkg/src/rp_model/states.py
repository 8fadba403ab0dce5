"""CISS-parameterized initial state and recombination projector"""

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from src.errors import ConfigurationError
from src.spin_core.hamiltonian import SpinSystemSpec


# Electronic basis index of |up_D down_A> and |down_D up_A> in [e_D, e_A] order
UP_DOWN = 1
DOWN_UP = 2


@dataclass(frozen=True)
class CissAngle:
    """Spin-selectivity angle chi in radians, 0 = singlet, pi/2 = full CISS"""
    chi: float

    def __post_init__(self):
        if not math.isfinite(self.chi) or not 0.0 <= self.chi <= math.pi / 2:
            raise ConfigurationError(f"CISS angle must lie in [0, pi/2], got {self.chi}")

    @classmethod
    def from_degrees(cls, degrees: float) -> "CissAngle":
        return cls(math.radians(degrees))


ChiLike = Union[float, CissAngle]


def as_chi(chi: ChiLike) -> float:
    """Validate and unwrap a CISS angle"""
    if isinstance(chi, CissAngle):
        return chi.chi
    return CissAngle(float(chi)).chi


def initial_electronic_state(chi: ChiLike) -> np.ndarray:
    """|psi_I> on the 4-dimensional electron-pair space"""
    half = 0.5 * as_chi(chi)
    s, c = math.sin(half), math.cos(half)
    psi = np.zeros(4, dtype=complex)
    psi[UP_DOWN] = (s + c) / math.sqrt(2)
    psi[DOWN_UP] = (s - c) / math.sqrt(2)
    return psi


def recombination_state(chi: ChiLike) -> np.ndarray:
    """|psi_R> on the 4-dimensional electron-pair space"""
    half = 0.5 * as_chi(chi)
    s, c = math.sin(half), math.cos(half)
    psi = np.zeros(4, dtype=complex)
    psi[UP_DOWN] = -(s - c) / math.sqrt(2)
    psi[DOWN_UP] = -(s + c) / math.sqrt(2)
    return psi


def initial_density(chi: ChiLike, system: SpinSystemSpec) -> np.ndarray:
    """
    Initial density matrix |psi_I><psi_I| ⊗ I/Z.

    Args:
        chi: CISS angle
        system: Radical-pair composition (sets Z)

    Returns:
        Unit-trace density matrix of dimension 4Z
    """
    psi = initial_electronic_state(chi)
    z = system.nuclear_dimension
    return np.kron(np.outer(psi, psi.conj()), np.eye(z) / z)


def recombination_projector(chi: ChiLike, system: SpinSystemSpec) -> np.ndarray:
    """Recombination operator |psi_R><psi_R| ⊗ I_Z"""
    psi = recombination_state(chi)
    return np.kron(np.outer(psi, psi.conj()), np.eye(system.nuclear_dimension))
