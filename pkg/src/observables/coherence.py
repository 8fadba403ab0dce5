"""Von Neumann entropy and relative entropy of coherence"""

from enum import Enum
from typing import Dict, Union

import numpy as np
from scipy.special import entr

from src.errors import DimensionError, InvalidStateError
from src.spin_core.hamiltonian import SpinSystemSpec


# Eigenvalues below -floor (scaled by the initial unit trace, not the decayed
# one) are treated as a broken state, not integration error
NEGATIVE_EIGENVALUE_FLOOR = 1e-8


class CoherenceScope(Enum):
    """Electron-only (local) or electron-nuclear (global) coherence"""
    LOCAL = "local"
    GLOBAL = "global"


ScopeLike = Union[CoherenceScope, str]


def as_scope(scope: ScopeLike) -> CoherenceScope:
    return scope if isinstance(scope, CoherenceScope) else CoherenceScope(scope)


def _spectrum(rho: np.ndarray) -> np.ndarray:
    """Eigenvalues of the Hermitian part, with round-off negatives clipped to zero"""
    hermitian = 0.5 * (rho + rho.conj().T)
    eigvals = np.linalg.eigvalsh(hermitian)
    trace = abs(float(np.sum(eigvals)))
    floor = NEGATIVE_EIGENVALUE_FLOOR * max(trace, 1.0)
    if eigvals[0] < -floor:
        raise InvalidStateError(
            f"Density matrix has eigenvalue {eigvals[0]:.3e} below -{floor:.1e}"
        )
    return np.clip(eigvals, 0.0, None)


def von_neumann_entropy(rho: np.ndarray) -> float:
    """
    S(rho) = -Tr(rho ln rho) in nats, with 0 ln 0 = 0.

    Subnormalized matrices are used as given.

    Raises:
        InvalidStateError: If an eigenvalue lies below -1e-8 (times the trace when it exceeds 1)
    """
    return float(np.sum(entr(_spectrum(rho))))


def diagonal_entropy(rho: np.ndarray) -> float:
    """Entropy of rho dephased in the computational product basis"""
    populations = np.clip(np.real(np.diag(rho)), 0.0, None)
    return float(np.sum(entr(populations)))


def _nuclear_dimension(rho: np.ndarray, system: Union[SpinSystemSpec, int]) -> int:
    z = system if isinstance(system, (int, np.integer)) else system.nuclear_dimension
    if rho.ndim != 2 or rho.shape != (4 * z, 4 * z):
        raise DimensionError(f"Expected a {4 * z}x{4 * z} density matrix, got shape {rho.shape}")
    return int(z)


def partial_trace_to_electrons(rho: np.ndarray, system: Union[SpinSystemSpec, int]) -> np.ndarray:
    """
    Trace out the nuclear factors, leaving the 4x4 electron-pair state.

    Args:
        rho: Joint density matrix over [e_D, e_A, nuclei...]
        system: Spin system, or the nuclear dimension Z directly
    """
    z = _nuclear_dimension(rho, system)
    return np.einsum("anbn->ab", rho.reshape(4, z, 4, z))


def coherence(
    rho: np.ndarray,
    scope: ScopeLike,
    system: Union[SpinSystemSpec, int],
    renormalize: bool = False,
) -> float:
    """
    Relative entropy of coherence S(rho_diag) - S(rho).

    The local scope applies it to the electron-pair reduced state, the
    global scope to the full electron-nuclear state.

    Args:
        rho: Joint density matrix
        scope: local or global
        system: Spin system, or the nuclear dimension Z
        renormalize: Divide by Tr(rho) before evaluating entropies

    Returns:
        Coherence in nats
    """
    scope = as_scope(scope)
    if scope is CoherenceScope.LOCAL:
        rho = partial_trace_to_electrons(rho, system)
    else:
        _nuclear_dimension(rho, system)

    if renormalize:
        trace = float(np.real(np.trace(rho)))
        if trace > 0:
            rho = rho / trace

    return diagonal_entropy(rho) - von_neumann_entropy(rho)


def make_observer(psi_r: np.ndarray, system: SpinSystemSpec, renormalize: bool = False):
    """
    Per-sample observer returning C_L, C_G and Tr[P_R rho].

    Tr[P_R rho] is evaluated on the electron-reduced state as
    <psi_R| rho_el |psi_R>, since P_R acts as identity on the nuclei.
    """
    z = system.nuclear_dimension
    psi_r = np.asarray(psi_r)

    def observe(rho: np.ndarray) -> Dict[str, float]:
        rho_el = partial_trace_to_electrons(rho, z)
        return {
            "C_L": coherence(rho, CoherenceScope.LOCAL, z, renormalize),
            "C_G": coherence(rho, CoherenceScope.GLOBAL, z, renormalize),
            "recombination_population": float(np.real(psi_r.conj() @ rho_el @ psi_r)),
        }

    return observe
