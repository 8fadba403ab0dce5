"""Angular-momentum operators and their embedding in a tensor-product space"""

from functools import reduce
from typing import Sequence, Tuple

import numpy as np

from src.errors import ConfigurationError, DimensionError


def spin_operators(multiplicity: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Build Sx, Sy, Sz for a spin of the given multiplicity (2s + 1).

    Basis order is m = s, s-1, ..., -s, so Sz is diagonal and decreasing.

    Args:
        multiplicity: Number of spin states, at least 2

    Returns:
        Tuple of complex (Sx, Sy, Sz) matrices in units of hbar
    """
    if int(multiplicity) != multiplicity or multiplicity < 2:
        raise ConfigurationError(f"Spin multiplicity must be an integer >= 2, got {multiplicity}")

    multiplicity = int(multiplicity)
    s = (multiplicity - 1) / 2.0
    m = s - np.arange(multiplicity)

    # <m+1|S+|m> = sqrt(s(s+1) - m(m+1)), one row above the diagonal
    raising = np.diag(np.sqrt(s * (s + 1) - m[1:] * (m[1:] + 1)), k=1).astype(complex)
    lowering = raising.conj().T

    sx = 0.5 * (raising + lowering)
    sy = -0.5j * (raising - lowering)
    sz = np.diag(m).astype(complex)
    return sx, sy, sz


def pauli_matrices() -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pauli matrices (twice the spin-1/2 operators)"""
    sx, sy, sz = spin_operators(2)
    return 2 * sx, 2 * sy, 2 * sz


def embed_operator(op: np.ndarray, slot: int, dims: Sequence[int]) -> np.ndarray:
    """
    Embed a single-factor operator into the joint space I ⊗ ... ⊗ op ⊗ ... ⊗ I.

    Args:
        op: Square matrix acting on factor `slot`
        slot: Index of the tensor factor
        dims: Dimensions of every tensor factor, in order

    Returns:
        Dense matrix of dimension prod(dims)
    """
    dims = [int(d) for d in dims]
    if not 0 <= slot < len(dims):
        raise DimensionError(f"Slot {slot} out of range for {len(dims)} tensor factors")
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise DimensionError(f"Operator must be square, got shape {op.shape}")
    if op.shape[0] != dims[slot]:
        raise DimensionError(
            f"Operator dimension {op.shape[0]} does not match dims[{slot}] = {dims[slot]}"
        )

    left = int(np.prod(dims[:slot], dtype=np.int64))
    right = int(np.prod(dims[slot + 1:], dtype=np.int64))
    factors = [np.eye(left), op, np.eye(right)]
    return reduce(np.kron, factors).astype(complex)
