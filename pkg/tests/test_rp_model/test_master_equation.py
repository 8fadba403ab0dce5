"""Tests for the master equation, dissipator and effective Hamiltonian"""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from src.errors import ConfigurationError, DimensionError
from src.rp_model.master_equation import (
    RateSpec,
    build_reaction_model,
    collapse_operators,
    dissipator,
    effective_hamiltonian,
    master_rhs,
)
from src.rp_model.states import initial_density, recombination_projector
from src.spin_core.hamiltonian import CouplingSpec, FieldSpec, Nucleus, SpinSystemSpec, build_hamiltonian


def _random_density(dim, rng):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def _explicit_dissipator(rho, system, k_dec):
    total = np.zeros_like(rho)
    for c in collapse_operators(system):
        total += c @ rho @ c.conj().T - 0.5 * (c.conj().T @ c @ rho + rho @ c.conj().T @ c)
    return k_dec * total


class TestRateSpec:
    """Test rate validation"""

    @pytest.mark.parametrize("kwargs", [{"k_f": -1.0}, {"k_r": float("inf")}, {"k_dec": float("nan")}])
    def test_invalid_rates(self, kwargs):
        """Rates must be finite and non-negative"""
        with pytest.raises(ConfigurationError):
            RateSpec(**kwargs)


class TestCollapseOperators:
    """Test the six Pauli collapse operators"""

    def test_count_and_unitarity(self, one_nucleus):
        """Six operators, each Hermitian and squaring to identity"""
        ops = collapse_operators(one_nucleus)
        assert len(ops) == 6
        for c in ops:
            assert np.allclose(c, c.conj().T)
            assert np.allclose(c @ c, np.eye(one_nucleus.dimension))

    def test_fast_form_matches_explicit(self, one_nucleus):
        """The depolarizing shortcut equals the explicit Lindblad sum"""
        rng = np.random.default_rng(7)
        rho = _random_density(one_nucleus.dimension, rng)
        assert np.allclose(dissipator(rho, 3.0), _explicit_dissipator(rho, one_nucleus, 3.0), atol=1e-12)

    def test_identity_fixed_point(self, toy_1n1n):
        """The maximally mixed state is stationary under Pauli decoherence"""
        dim = toy_1n1n.dimension
        assert np.linalg.norm(dissipator(np.eye(dim) / dim, 1e7)) < 1e-9

    def test_zero_rate(self, bare_pair):
        """k_dec = 0 contributes nothing"""
        rho = np.eye(4) / 4
        assert np.array_equal(dissipator(rho, 0.0), np.zeros((4, 4)))


class TestMasterRhs:
    """Test the master-equation right-hand side"""

    def test_pure_forward_decay(self, one_nucleus):
        """H = 0, k_R = 0 gives rhs = -k_F rho"""
        rho = initial_density(0.7, one_nucleus)
        zero = np.zeros_like(rho)
        rates = RateSpec(k_f=2e6, k_r=0.0)
        p_r = recombination_projector(0.7, one_nucleus)
        assert np.allclose(master_rhs(rho, zero, p_r, rates), -2e6 * rho)

    def test_singlet_invariant_decay(self, one_nucleus):
        """chi = 0, H = 0: P_R rho0 = rho0 so rhs = -(k_F + k_R) rho0"""
        rho = initial_density(0.0, one_nucleus)
        p_r = recombination_projector(0.0, one_nucleus)
        rates = RateSpec(k_f=1e6, k_r=1e8)
        rhs = master_rhs(rho, np.zeros_like(rho), p_r, rates)
        assert np.allclose(rhs, -(1e6 + 1e8) * rho, atol=1e-6)

    def test_literal_bracket_conserves_trace(self, one_nucleus):
        """The commutator bracket drains no trace through recombination"""
        rng = np.random.default_rng(3)
        rho = _random_density(one_nucleus.dimension, rng)
        p_r = recombination_projector(0.5, one_nucleus)
        rates = RateSpec(k_f=0.0, k_r=1e8)
        rhs = master_rhs(rho, np.zeros_like(rho), p_r, rates, paper_literal_bracket=True)
        assert abs(np.trace(rhs)) < 1e-6

    def test_shape_mismatch(self, one_nucleus):
        """Operands must share one shape"""
        with pytest.raises(DimensionError):
            master_rhs(np.eye(8), np.eye(8), np.eye(4), RateSpec())


# Feature: reaction-model, Property 6: Hermiticity and trace bookkeeping of the rhs
@pytest.mark.property
@given(
    seed=st.integers(min_value=0, max_value=2**32 - 1),
    chi=st.floats(min_value=0.0, max_value=math.pi / 2),
    k_f=st.floats(min_value=0.0, max_value=1e8),
    k_r=st.floats(min_value=0.0, max_value=1e8),
    k_dec=st.floats(min_value=0.0, max_value=1e8),
)
def test_property_rhs_hermitian_and_trace(seed, chi, k_f, k_r, k_dec):
    """rhs(rho) is Hermitian and Tr rhs = -k_R Tr[P_R rho] - k_F Tr rho"""
    rng = np.random.default_rng(seed)
    system = SpinSystemSpec(donor_nuclei=(Nucleus(2, rng.normal(size=(3, 3))),))
    h = build_hamiltonian(system, FieldSpec(theta=0.4), CouplingSpec(j_exchange=0.1))
    rho = _random_density(system.dimension, rng)
    p_r = recombination_projector(chi, system)
    rates = RateSpec(k_f=k_f, k_r=k_r, k_dec=k_dec)

    rhs = master_rhs(rho, h, p_r, rates)
    scale = max(np.linalg.norm(h), k_f, k_r, k_dec, 1.0)
    assert np.linalg.norm(rhs - rhs.conj().T) < 1e-12 * scale

    expected = -k_r * np.trace(p_r @ rho) - k_f * np.trace(rho)
    assert abs(np.trace(rhs) - expected) < 1e-10 * scale


class TestEffectiveHamiltonian:
    """Test the non-Hermitian rewriting used without decoherence"""

    def test_lossless_limit(self, one_nucleus):
        """k_F = k_R = 0 leaves H unchanged"""
        h = build_hamiltonian(one_nucleus, FieldSpec(), CouplingSpec())
        p_r = recombination_projector(0.3, one_nucleus)
        assert np.array_equal(effective_hamiltonian(h, p_r, RateSpec(k_f=0.0, k_r=0.0)), h)

    def test_rejects_decoherence(self, one_nucleus):
        """Decoherence has no effective-Hamiltonian form"""
        h = np.zeros((8, 8))
        with pytest.raises(ConfigurationError):
            effective_hamiltonian(h, h, RateSpec(k_dec=1.0))

    def test_decay_spectrum(self, one_nucleus):
        """H = 0, chi = 0: decay rates are k_F and k_F + k_R (singlet sector)"""
        p_r = recombination_projector(0.0, one_nucleus)
        h_eff = effective_hamiltonian(np.zeros((8, 8)), p_r, RateSpec(k_f=1e6, k_r=1e8))
        rates = np.sort(-2 * np.linalg.eigvals(h_eff).imag)
        z = one_nucleus.nuclear_dimension
        assert np.allclose(rates[:3 * z], 1e6)
        assert np.allclose(rates[3 * z:], 1e6 + 1e8)

    def test_matches_rhs(self, toy_1n1n):
        """-i(H_eff rho - rho H_eff^dagger) equals master_rhs without decoherence"""
        rng = np.random.default_rng(11)
        h = build_hamiltonian(toy_1n1n, FieldSpec(theta=0.9, phi=0.4), CouplingSpec(d_dipolar=-0.2))
        p_r = recombination_projector(0.8, toy_1n1n)
        rates = RateSpec(k_f=1e6, k_r=1e8)
        rho = _random_density(toy_1n1n.dimension, rng)
        h_eff = effective_hamiltonian(h, p_r, rates)
        via_heff = -1j * (h_eff @ rho - rho @ h_eff.conj().T)
        assert np.allclose(via_heff, master_rhs(rho, h, p_r, rates), atol=1e-4)

    def test_anti_hermitian_part_negative(self, toy_1n1n):
        """The anti-Hermitian part of H_eff is negative semidefinite"""
        h = build_hamiltonian(toy_1n1n, FieldSpec(), CouplingSpec())
        p_r = recombination_projector(0.2, toy_1n1n)
        h_eff = effective_hamiltonian(h, p_r, RateSpec())
        anti = (h_eff - h_eff.conj().T) / 2j
        assert np.linalg.eigvalsh(anti)[-1] <= 1e-6


class TestReactionModel:
    """Test the prebuilt per-point bundle"""

    def test_arrays_read_only(self, toy_1n1n):
        """Bundled arrays cannot be mutated by workers"""
        model = build_reaction_model(toy_1n1n, 0.5, FieldSpec(), CouplingSpec(), RateSpec())
        with pytest.raises(ValueError):
            model.rho0[0, 0] = 1.0
        assert model.dimension == 16

    def test_effective_hamiltonian_support(self, toy_1n1n):
        """Decoherence or the literal bracket disable the eigenbasis path"""
        plain = build_reaction_model(toy_1n1n, 0.5, FieldSpec(), CouplingSpec(), RateSpec())
        noisy = build_reaction_model(toy_1n1n, 0.5, FieldSpec(), CouplingSpec(), RateSpec(k_dec=1e5))
        literal = build_reaction_model(
            toy_1n1n, 0.5, FieldSpec(), CouplingSpec(), RateSpec(), paper_literal_bracket=True
        )
        assert plain.supports_effective_hamiltonian
        assert not noisy.supports_effective_hamiltonian
        assert not literal.supports_effective_hamiltonian
        with pytest.raises(ConfigurationError):
            literal.effective_hamiltonian()

    def test_rhs_uses_model_operators(self, toy_1n1n):
        """ReactionModel.rhs equals master_rhs on its own operators"""
        model = build_reaction_model(toy_1n1n, 0.5, FieldSpec(), CouplingSpec(), RateSpec(k_dec=1e5))
        expected = master_rhs(model.rho0, model.hamiltonian, model.projector, model.rates)
        assert np.array_equal(model.rhs(model.rho0), expected)
