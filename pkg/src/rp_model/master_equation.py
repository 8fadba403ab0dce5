"""Haberkorn master equation with optional Pauli decoherence"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from src.errors import ConfigurationError, DimensionError
from src.spin_core.hamiltonian import (
    ACCEPTOR_SLOT,
    DEFAULT_MAX_DIMENSION,
    DONOR_SLOT,
    CouplingSpec,
    FieldSpec,
    SpinSystemSpec,
    build_hamiltonian,
)
from src.spin_core.operators import embed_operator, pauli_matrices
from src.rp_model.states import ChiLike, as_chi, initial_density, recombination_projector, recombination_state


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RateSpec:
    """Reaction and decoherence rates in s^-1"""
    k_f: float = 1e6
    k_r: float = 1e8
    k_dec: float = 0.0

    def __post_init__(self):
        for name in ("k_f", "k_r", "k_dec"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ConfigurationError(f"Rate {name} must be finite and >= 0, got {value}")


def collapse_operators(system: SpinSystemSpec) -> List[np.ndarray]:
    """C_1..C_6: sigma_x, sigma_y, sigma_z on the donor electron, then on the acceptor electron"""
    dims = system.dims
    return [
        embed_operator(sigma, slot, dims)
        for slot in (DONOR_SLOT, ACCEPTOR_SLOT)
        for sigma in pauli_matrices()
    ]


def _electron_depolarizer(rho: np.ndarray, slot: int) -> np.ndarray:
    """Sum over sigma_x,y,z of sigma rho sigma on one electron: 2 I ⊗ Tr_e(rho) - rho"""
    dim = rho.shape[0]
    left = 2 ** slot
    right = dim // (2 * left)
    blocks = rho.reshape(left, 2, right, left, 2, right)
    reduced = blocks[:, 0, :, :, 0, :] + blocks[:, 1, :, :, 1, :]
    mixed = np.einsum("anbm,jk->ajnbkm", reduced, np.eye(2))
    return 2.0 * mixed.reshape(dim, dim) - rho


def dissipator(rho: np.ndarray, k_dec: float) -> np.ndarray:
    """Lindblad term for the six unitary Hermitian Pauli collapse operators"""
    if k_dec == 0.0:
        return np.zeros_like(rho)
    # C^dagger C = I for every Pauli operator, so each contributes C rho C - rho
    total = np.zeros_like(rho)
    for slot in (DONOR_SLOT, ACCEPTOR_SLOT):
        total += _electron_depolarizer(rho, slot) - 3.0 * rho
    return k_dec * total


def master_rhs(
    rho: np.ndarray,
    hamiltonian: np.ndarray,
    projector: np.ndarray,
    rates: RateSpec,
    paper_literal_bracket: bool = False,
) -> np.ndarray:
    """
    Time derivative of the density matrix.

    -i[H, rho] - (k_R/2){P_R, rho} - k_F rho + k_dec * D[rho]

    Args:
        rho: Density matrix
        hamiltonian: Hamiltonian in rad/s
        projector: Recombination operator P_R
        rates: Reaction and decoherence rates
        paper_literal_bracket: Use the commutator [P_R, rho] instead of the
            anticommutator for recombination

    Returns:
        d(rho)/dt
    """
    if not (rho.shape == hamiltonian.shape == projector.shape):
        raise DimensionError(
            f"Shape mismatch: rho {rho.shape}, H {hamiltonian.shape}, P_R {projector.shape}"
        )

    drho = -1j * (hamiltonian @ rho - rho @ hamiltonian)

    if rates.k_r != 0.0:
        p_rho = projector @ rho
        rho_p = rho @ projector
        bracket = p_rho - rho_p if paper_literal_bracket else p_rho + rho_p
        drho -= 0.5 * rates.k_r * bracket

    if rates.k_f != 0.0:
        drho -= rates.k_f * rho

    if rates.k_dec != 0.0:
        drho += dissipator(rho, rates.k_dec)

    return drho


def effective_hamiltonian(hamiltonian: np.ndarray, projector: np.ndarray, rates: RateSpec) -> np.ndarray:
    """
    Non-Hermitian H_eff = H - i(k_R/2)P_R - i(k_F/2)I.

    With k_dec = 0 the master equation becomes rho' = -i(H_eff rho - rho H_eff^dagger).
    """
    if rates.k_dec != 0.0:
        raise ConfigurationError("Effective Hamiltonian is only exact without decoherence (k_dec = 0)")
    dim = hamiltonian.shape[0]
    return (
        hamiltonian
        - 0.5j * rates.k_r * projector
        - 0.5j * rates.k_f * np.eye(dim)
    )


@dataclass(frozen=True, eq=False)
class ReactionModel:
    """Prebuilt, read-only operators for one parameter point"""
    system: SpinSystemSpec
    chi: float
    rates: RateSpec
    hamiltonian: np.ndarray
    projector: np.ndarray
    rho0: np.ndarray
    psi_r: np.ndarray
    paper_literal_bracket: bool = False

    @property
    def dimension(self) -> int:
        return self.hamiltonian.shape[0]

    @property
    def supports_effective_hamiltonian(self) -> bool:
        return self.rates.k_dec == 0.0 and not self.paper_literal_bracket

    def rhs(self, rho: np.ndarray) -> np.ndarray:
        return master_rhs(rho, self.hamiltonian, self.projector, self.rates, self.paper_literal_bracket)

    def effective_hamiltonian(self) -> np.ndarray:
        if self.paper_literal_bracket:
            raise ConfigurationError("Commutator recombination has no effective-Hamiltonian form")
        return effective_hamiltonian(self.hamiltonian, self.projector, self.rates)


def build_reaction_model(
    system: SpinSystemSpec,
    chi: ChiLike,
    field: FieldSpec,
    coupling: CouplingSpec,
    rates: RateSpec,
    paper_literal_bracket: bool = False,
    max_dimension: int = DEFAULT_MAX_DIMENSION,
    hamiltonian: Optional[np.ndarray] = None,
) -> ReactionModel:
    """Build H, P_R and rho(0) for one parameter point"""
    chi = as_chi(chi)
    if hamiltonian is None:
        hamiltonian = build_hamiltonian(system, field, coupling, max_dimension=max_dimension)
    model = ReactionModel(
        system=system,
        chi=chi,
        rates=rates,
        hamiltonian=hamiltonian,
        projector=recombination_projector(chi, system),
        rho0=initial_density(chi, system),
        psi_r=recombination_state(chi),
        paper_literal_bracket=paper_literal_bracket,
    )
    for array in (model.hamiltonian, model.projector, model.rho0, model.psi_r):
        array.setflags(write=False)
    return model
