"""Tests for spin operators and tensor-product embedding"""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from src.errors import ConfigurationError, DimensionError
from src.spin_core.operators import embed_operator, pauli_matrices, spin_operators


class TestSpinOperators:
    """Test the ladder construction of Sx, Sy, Sz"""

    def test_spin_half_sz(self):
        """Sz of a spin-1/2 is diag(+1/2, -1/2)"""
        _, _, sz = spin_operators(2)
        assert np.array_equal(sz, np.diag([0.5, -0.5]).astype(complex))

    def test_spin_half_commutator_exact(self):
        """[Sx, Sy] = i Sz holds exactly for spin-1/2"""
        sx, sy, sz = spin_operators(2)
        assert np.array_equal(sx @ sy - sy @ sx, 1j * sz)

    def test_spin_one_sx_eigenvalues(self):
        """Sx of a spin-1 has eigenvalues -1, 0, +1"""
        sx, _, _ = spin_operators(3)
        assert np.allclose(np.linalg.eigvalsh(sx), [-1.0, 0.0, 1.0], atol=1e-14)

    def test_pauli_matrices_square_to_identity(self):
        """Each Pauli matrix is unitary and Hermitian"""
        for sigma in pauli_matrices():
            assert np.allclose(sigma @ sigma, np.eye(2))
            assert np.allclose(sigma, sigma.conj().T)

    @pytest.mark.parametrize("multiplicity", [0, 1, 2.5])
    def test_invalid_multiplicity(self, multiplicity):
        """Multiplicities below 2 or non-integer are rejected"""
        with pytest.raises(ConfigurationError):
            spin_operators(multiplicity)


# Feature: spin-operators, Property 1: angular momentum algebra
@pytest.mark.property
@given(multiplicity=st.integers(min_value=2, max_value=7))
def test_property_angular_momentum_algebra(multiplicity):
    """Operators are Hermitian, obey cyclic commutators and S^2 = s(s+1)"""
    sx, sy, sz = spin_operators(multiplicity)
    s = (multiplicity - 1) / 2

    for op in (sx, sy, sz):
        assert np.allclose(op, op.conj().T, atol=1e-14)
    assert np.allclose(sx @ sy - sy @ sx, 1j * sz, atol=1e-12)
    assert np.allclose(sy @ sz - sz @ sy, 1j * sx, atol=1e-12)
    assert np.allclose(sz @ sx - sx @ sz, 1j * sy, atol=1e-12)
    assert np.allclose(sx @ sx + sy @ sy + sz @ sz, s * (s + 1) * np.eye(multiplicity), atol=1e-12)
    assert np.allclose(np.diag(sz).real, s - np.arange(multiplicity))


class TestEmbedOperator:
    """Test Kronecker embedding into the joint space"""

    def test_embed_sz_first_slot(self):
        """Sz at slot 0 of [2, 2] is diag(1/2, 1/2, -1/2, -1/2)"""
        _, _, sz = spin_operators(2)
        embedded = embed_operator(sz, 0, [2, 2])
        assert np.array_equal(embedded, np.diag([0.5, 0.5, -0.5, -0.5]).astype(complex))

    def test_distinct_slots_commute(self):
        """Operators on different factors commute"""
        sx, _, sz = spin_operators(2)
        a = embed_operator(sz, 0, [2, 2, 3])
        b = embed_operator(sx, 1, [2, 2, 3])
        assert np.linalg.norm(a @ b - b @ a) < 1e-14

    def test_trace_multiplicativity(self):
        """Tr(embedded) = Tr(op) * product of the other dimensions"""
        op = np.diag([1.0, 2.0, 4.0]).astype(complex)
        embedded = embed_operator(op, 1, [2, 3, 2])
        assert np.isclose(np.trace(embedded), np.trace(op) * 4)

    def test_dimension_mismatch(self):
        """Operator size must match its slot"""
        _, _, sz = spin_operators(2)
        with pytest.raises(DimensionError):
            embed_operator(sz, 0, [3, 2])

    def test_slot_out_of_range(self):
        """Slot must index an existing factor"""
        _, _, sz = spin_operators(2)
        with pytest.raises(DimensionError):
            embed_operator(sz, 2, [2, 2])

    def test_non_square_operator(self):
        """Rectangular operators are rejected"""
        with pytest.raises(DimensionError):
            embed_operator(np.zeros((2, 3)), 0, [2, 2])
