"""Time integrals over trajectories: total coherence and reaction yields"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.integrate import simpson, trapezoid

from src.errors import ConfigurationError, NumericalError
from src.observables.coherence import CoherenceScope, ScopeLike, as_scope, coherence
from src.propagation.propagator import Trajectory
from src.rp_model.master_equation import RateSpec
from src.spin_core.hamiltonian import SpinSystemSpec


logger = logging.getLogger(__name__)

SERIES_KEYS = {CoherenceScope.LOCAL: "C_L", CoherenceScope.GLOBAL: "C_G"}


@dataclass
class IntegratedCoherence:
    """Total coherence M_i with an estimate of the truncated tail"""
    scope: CoherenceScope
    value: float  # nats * s
    tail_error: float
    horizon_reached: bool


@dataclass
class YieldPair:
    """Forward (signaling) and recombination yields"""
    phi_f: float
    phi_r: float
    tail_error: float
    horizon_reached: bool
    conserved: bool
    warnings: List[str] = field(default_factory=list)

    @property
    def total(self) -> float:
        return self.phi_f + self.phi_r


def integrate_series(times: np.ndarray, values: np.ndarray, quadrature: str = "trapezoid") -> float:
    """Integrate sampled values over their (possibly non-uniform) time grid"""
    if quadrature == "trapezoid":
        return float(trapezoid(values, times))
    if quadrature == "simpson":
        return float(simpson(values, x=times))
    raise ConfigurationError(f"Unknown quadrature '{quadrature}'")


def tail_decay_rate(rates: RateSpec) -> float:
    """Rate bounding the decay of the trace after the horizon"""
    return rates.k_f if rates.k_f > 0 else rates.k_r


def coherence_series(
    trajectory: Trajectory,
    scope: ScopeLike,
    system: Optional[SpinSystemSpec] = None,
    renormalize: bool = False,
) -> np.ndarray:
    """C_i(t) on the trajectory's sample grid"""
    scope = as_scope(scope)
    key = SERIES_KEYS[scope]
    if key in trajectory.scalars:
        return trajectory.scalars[key]
    if trajectory.states is None or system is None:
        raise NumericalError(
            f"Trajectory has neither a '{key}' series nor stored states to compute it from"
        )
    return np.array([coherence(rho, scope, system, renormalize) for rho in trajectory.states])


def total_coherence(
    trajectory: Trajectory,
    scope: ScopeLike,
    rates: RateSpec,
    system: Optional[SpinSystemSpec] = None,
    quadrature: str = "trapezoid",
    renormalize: bool = False,
) -> IntegratedCoherence:
    """
    M_i = integral of C_i(rho(t)) dt over the trajectory.

    The neglected tail beyond the horizon is estimated as C(T)/k with k the
    trace decay rate, and reported rather than added.
    """
    scope = as_scope(scope)
    values = coherence_series(trajectory, scope, system, renormalize)
    value = integrate_series(trajectory.times, values, quadrature)

    rate = tail_decay_rate(rates)
    tail = float(max(values[-1], 0.0) / rate) if rate > 0 else float("inf")

    if not trajectory.horizon_reached:
        logger.warning(
            f"M_{scope.value}: horizon not reached (final trace {trajectory.final_trace:.3e})"
        )
    return IntegratedCoherence(
        scope=scope, value=value, tail_error=tail, horizon_reached=trajectory.horizon_reached
    )


def yields(
    trajectory: Trajectory,
    projector: Optional[np.ndarray],
    rates: RateSpec,
    quadrature: str = "trapezoid",
    tolerance: float = 5e-3,
) -> YieldPair:
    """
    phi_F = k_F * integral Tr[rho] dt and phi_R = k_R * integral Tr[P_R rho] dt.

    Args:
        trajectory: Propagated trajectory
        projector: Recombination operator; may be None when the trajectory
            already carries a 'recombination_population' series
        rates: Reaction rates used for the trajectory
        quadrature: Integration rule
        tolerance: Allowed deviation of phi_F + phi_R from 1
    """
    if "recombination_population" in trajectory.scalars:
        population = trajectory.scalars["recombination_population"]
    elif trajectory.states is not None and projector is not None:
        population = np.real(np.einsum("ij,tji->t", projector, trajectory.states))
    else:
        raise NumericalError("Recombination population unavailable: no series, states or projector")

    phi_f = rates.k_f * integrate_series(trajectory.times, trajectory.traces, quadrature)
    phi_r = rates.k_r * integrate_series(trajectory.times, population, quadrature)

    rate = tail_decay_rate(rates)
    tail = (
        (rates.k_f * trajectory.final_trace + rates.k_r * max(float(population[-1]), 0.0)) / rate
        if rate > 0 else float("inf")
    )

    warnings = []
    horizon_reached = trajectory.horizon_reached
    if not horizon_reached:
        warnings.append(f"horizon not reached (final trace {trajectory.final_trace:.3e})")

    conserved = abs(phi_f + phi_r - 1.0) <= tolerance
    if horizon_reached and not conserved:
        warnings.append(f"phi_F + phi_R = {phi_f + phi_r:.6f} deviates from 1 by more than {tolerance:g}")

    for message in warnings:
        logger.warning(f"Yields: {message}")

    return YieldPair(
        phi_f=phi_f, phi_r=phi_r, tail_error=tail,
        horizon_reached=horizon_reached, conserved=conserved, warnings=warnings,
    )
