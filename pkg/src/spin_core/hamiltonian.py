"""Spin-system description and assembly of the radical-pair Hamiltonian"""

import logging
from functools import reduce
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from src.errors import ConfigurationError, DimensionError
from src.spin_core.operators import embed_operator, spin_operators


logger = logging.getLogger(__name__)

# Free-electron gyromagnetic ratio g*mu_B/hbar, rad s^-1 T^-1
GAMMA_E = 1.76086e11

MT_TO_TESLA = 1e-3
UT_TO_TESLA = 1e-6

# Point-dipole coupling at 1 nm, in uT
DIPOLAR_UT_NM3 = -2.78e3

DEFAULT_MAX_DIMENSION = 4096

FIELD_CONVENTIONS = ("standard_spherical", "paper_literal")

# Tensor factor order: [electron_D, electron_A, donor nuclei..., acceptor nuclei...]
DONOR_SLOT = 0
ACCEPTOR_SLOT = 1


def mt_to_angular(value_mt: float) -> float:
    """Convert a coupling in mT to angular frequency (rad/s)"""
    return value_mt * MT_TO_TESLA * GAMMA_E


@dataclass(frozen=True, eq=False)
class Nucleus:
    """A magnetic nucleus and its hyperfine tensor (mT)"""
    multiplicity: int
    tensor: np.ndarray

    def __post_init__(self):
        if int(self.multiplicity) != self.multiplicity or self.multiplicity < 2:
            raise ConfigurationError(f"Nuclear multiplicity must be an integer >= 2, got {self.multiplicity}")
        tensor = np.asarray(self.tensor, dtype=float)
        if tensor.shape != (3, 3):
            raise ConfigurationError(f"Hyperfine tensor must be 3x3, got shape {tensor.shape}")
        if not np.all(np.isfinite(tensor)):
            raise ConfigurationError("Hyperfine tensor has non-finite entries")
        object.__setattr__(self, "multiplicity", int(self.multiplicity))
        object.__setattr__(self, "tensor", tensor)

    @classmethod
    def isotropic(cls, a_mt: float, multiplicity: int = 2) -> "Nucleus":
        return cls(multiplicity, a_mt * np.eye(3))


@dataclass(frozen=True, eq=False)
class SpinSystemSpec:
    """
    Radical-pair composition.

    Donor nuclei couple only to the donor electron, acceptor nuclei only to
    the acceptor electron.
    """
    donor_nuclei: Tuple[Nucleus, ...] = ()
    acceptor_nuclei: Tuple[Nucleus, ...] = ()
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "donor_nuclei", tuple(self.donor_nuclei))
        object.__setattr__(self, "acceptor_nuclei", tuple(self.acceptor_nuclei))

    @property
    def nuclei(self) -> Tuple[Nucleus, ...]:
        return self.donor_nuclei + self.acceptor_nuclei

    @property
    def dims(self) -> List[int]:
        return [2, 2] + [n.multiplicity for n in self.nuclei]

    @property
    def nuclear_dimension(self) -> int:
        """Z, the nuclear Hilbert dimension"""
        return int(np.prod([n.multiplicity for n in self.nuclei], dtype=np.int64))

    @property
    def dimension(self) -> int:
        return 4 * self.nuclear_dimension

    @property
    def nucleus_count(self) -> int:
        return len(self.nuclei)


@dataclass(frozen=True)
class FieldSpec:
    """Static magnetic field: strength in uT, orientation in radians"""
    b0: float = 50.0
    theta: float = 0.0
    phi: float = 0.0
    convention: str = "standard_spherical"

    def __post_init__(self):
        if not math.isfinite(self.b0) or self.b0 < 0:
            raise ConfigurationError(f"Field strength must be >= 0 uT, got {self.b0}")
        if not 0.0 <= self.theta <= math.pi:
            raise ConfigurationError(f"theta must lie in [0, pi], got {self.theta}")
        if not 0.0 <= self.phi < 2 * math.pi:
            raise ConfigurationError(f"phi must lie in [0, 2pi), got {self.phi}")
        if self.convention not in FIELD_CONVENTIONS:
            raise ConfigurationError(
                f"Unknown field convention '{self.convention}'. "
                f"Supported: {', '.join(FIELD_CONVENTIONS)}"
            )

    def direction(self) -> np.ndarray:
        """Direction vector of the field (not normalized for paper_literal)"""
        st, ct = math.sin(self.theta), math.cos(self.theta)
        sp, cp = math.sin(self.phi), math.cos(self.phi)
        if self.convention == "paper_literal":
            return np.array([ct * cp, ct * sp, ct])
        return np.array([st * cp, st * sp, ct])

    def vector_tesla(self) -> np.ndarray:
        return self.b0 * UT_TO_TESLA * self.direction()


@dataclass(frozen=True, eq=False)
class CouplingSpec:
    """Electron-electron exchange and dipolar couplings (mT)"""
    j_exchange: float = 0.0
    d_dipolar: float = 0.0
    dipolar_axis: Tuple[float, float, float] = (0.0, 0.0, 1.0)
    # Multiplies D(n n^T - I/3); 3/2 makes the axial principal value equal D
    dipolar_scale: float = 1.5

    def __post_init__(self):
        axis = np.asarray(self.dipolar_axis, dtype=float)
        if axis.shape != (3,) or not np.all(np.isfinite(axis)):
            raise ConfigurationError(f"Dipolar axis must be a finite 3-vector, got {self.dipolar_axis}")
        if abs(np.linalg.norm(axis) - 1.0) > 1e-9:
            raise ConfigurationError(f"Dipolar axis must have unit norm, got |n| = {np.linalg.norm(axis)}")
        for name in ("j_exchange", "d_dipolar", "dipolar_scale"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigurationError(f"{name} must be finite")
        object.__setattr__(self, "dipolar_axis", tuple(float(x) for x in axis))

    def dipolar_tensor(self) -> np.ndarray:
        """Traceless axial tensor in mT"""
        n = np.asarray(self.dipolar_axis)
        return self.dipolar_scale * self.d_dipolar * (np.outer(n, n) - np.eye(3) / 3.0)


def dipolar_constant_from_distance(r_nm: float) -> float:
    """
    Point-dipole coupling constant for an inter-radical distance.

    Args:
        r_nm: Electron-electron distance in nm

    Returns:
        D in mT (negative)
    """
    if not math.isfinite(r_nm) or r_nm <= 0:
        raise ConfigurationError(f"Inter-radical distance must be positive, got {r_nm} nm")
    return DIPOLAR_UT_NM3 / r_nm ** 3 * 1e-3


def _bilinear(
    left_slot: int,
    left_multiplicity: int,
    tensor: np.ndarray,
    right_slot: int,
    right_multiplicity: int,
    dims: Sequence[int],
) -> np.ndarray:
    """Sum_ab L_a T_ab R_b for spin vectors on two distinct tensor factors"""
    left = spin_operators(left_multiplicity)
    right = spin_operators(right_multiplicity)
    dim = int(np.prod(dims, dtype=np.int64))
    total = np.zeros((dim, dim), dtype=complex)
    for a in range(3):
        for b in range(3):
            if tensor[a, b] == 0.0:
                continue
            factors = [np.eye(d) for d in dims]
            factors[left_slot] = left[a]
            factors[right_slot] = right[b]
            total += tensor[a, b] * reduce(np.kron, factors)
    return total


def build_hamiltonian(
    system: SpinSystemSpec,
    field: FieldSpec,
    coupling: CouplingSpec,
    max_dimension: int = DEFAULT_MAX_DIMENSION,
) -> np.ndarray:
    """
    Assemble the Zeeman + hyperfine + exchange + dipolar Hamiltonian.

    Args:
        system: Radical-pair composition
        field: Static field
        coupling: Exchange and dipolar couplings
        max_dimension: Guard on the joint Hilbert dimension

    Returns:
        Hermitian matrix in rad/s over [e_D, e_A, donor nuclei, acceptor nuclei]
    """
    dim = system.dimension
    if dim > max_dimension:
        raise DimensionError(
            f"System '{system.label}' has Hilbert dimension {dim}, above the cap of {max_dimension}"
        )

    dims = system.dims
    hamiltonian = np.zeros((dim, dim), dtype=complex)

    b = field.vector_tesla()
    electron_spin = spin_operators(2)
    for c in range(3):
        if b[c] != 0.0:
            hamiltonian += GAMMA_E * b[c] * (
                embed_operator(electron_spin[c], DONOR_SLOT, dims)
                + embed_operator(electron_spin[c], ACCEPTOR_SLOT, dims)
            )

    n_donor = len(system.donor_nuclei)
    for index, nucleus in enumerate(system.nuclei):
        electron_slot = DONOR_SLOT if index < n_donor else ACCEPTOR_SLOT
        hamiltonian += mt_to_angular(1.0) * _bilinear(
            electron_slot, 2, nucleus.tensor, 2 + index, nucleus.multiplicity, dims
        )

    if coupling.j_exchange != 0.0:
        s_dot_s = _bilinear(ACCEPTOR_SLOT, 2, np.eye(3), DONOR_SLOT, 2, dims)
        identity = np.eye(dim, dtype=complex)
        hamiltonian -= mt_to_angular(coupling.j_exchange) * (2.0 * s_dot_s + 0.5 * identity)

    if coupling.d_dipolar != 0.0:
        hamiltonian += mt_to_angular(1.0) * _bilinear(
            ACCEPTOR_SLOT, 2, coupling.dipolar_tensor(), DONOR_SLOT, 2, dims
        )

    # Remove round-off asymmetry
    hamiltonian = 0.5 * (hamiltonian + hamiltonian.conj().T)
    logger.debug(f"Built Hamiltonian for '{system.label}' (dimension {dim})")
    return hamiltonian
