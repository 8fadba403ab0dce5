"""Density-matrix propagation: closed-form eigenbasis engine and fixed-step RK4"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from src.config.config_manager import IntegratorConfig
from src.errors import HorizonError, IntegrationError, NumericalError
from src.rp_model.master_equation import RateSpec, ReactionModel


logger = logging.getLogger(__name__)

# Per-sample scalar extraction, e.g. coherences; keeps memory independent of sample count
SampleObserver = Callable[[np.ndarray], Dict[str, float]]

RhsFunction = Callable[[np.ndarray], np.ndarray]

# RK4 step is reduced until dt * spectral radius stays below this
MAX_STEP_PHASE = 0.1
TRACE_GROWTH_LIMIT = 1e-6
TRACE_MONOTONIC_SLACK = 1e-9


@dataclass
class TrajectorySample:
    """One sampled point of a trajectory"""
    time: float
    trace: float
    values: Dict[str, float]
    state: Optional[np.ndarray] = None


@dataclass
class Trajectory:
    """Sampled evolution of a density matrix"""
    times: np.ndarray
    traces: np.ndarray
    scalars: Dict[str, np.ndarray]
    horizon: float
    engine: str
    config: IntegratorConfig
    states: Optional[np.ndarray] = None
    warnings: List[str] = field(default_factory=list)
    fell_back: bool = False  # eigenbasis was ill-conditioned and RK4 was used instead

    def __len__(self) -> int:
        return len(self.times)

    @property
    def samples(self) -> List[TrajectorySample]:
        return [
            TrajectorySample(
                time=float(self.times[i]),
                trace=float(self.traces[i]),
                values={name: float(values[i]) for name, values in self.scalars.items()},
                state=None if self.states is None else self.states[i],
            )
            for i in range(len(self.times))
        ]

    @property
    def final_trace(self) -> float:
        return float(self.traces[-1])

    @property
    def horizon_reached(self) -> bool:
        return self.final_trace <= self.config.trace_eps * (1 + 1e-6)


def choose_horizon(rates: RateSpec, trace_eps: float) -> float:
    """
    Integration horizon T such that Tr rho(T) <= trace_eps.

    The trace decays at least as exp(-k_F t), so T = ln(1/eps)/k_F is
    guaranteed when k_F > 0. Without a forward channel k_R is used instead,
    which only bounds the recombining part of the state.

    Raises:
        HorizonError: If both k_F and k_R are zero
    """
    if not 0 < trace_eps < 1:
        raise HorizonError(f"trace_eps must lie in (0, 1), got {trace_eps}")
    log_ratio = math.log(1.0 / trace_eps)
    if rates.k_f > 0:
        return log_ratio / rates.k_f
    if rates.k_r > 0:
        logger.warning(
            "k_F = 0: horizon based on k_R is not guaranteed to drain the trace"
        )
        return log_ratio / rates.k_r
    raise HorizonError("Both k_F and k_R are zero; the reaction never completes")


def sample_times(horizon: float, config: IntegratorConfig) -> np.ndarray:
    """
    Strictly increasing sample grid on [0, horizon].

    `front_loaded` puts `burst_fraction` of the samples uniformly on
    [0, burst_window * horizon] and spaces the rest geometrically.
    """
    n = int(config.sample_count)
    if config.sampler == "uniform":
        return np.linspace(0.0, horizon, n)

    n_burst = max(2, int(round(n * config.burst_fraction)))
    burst_end = config.burst_window * horizon
    burst = np.linspace(0.0, burst_end, n_burst)
    tail = np.geomspace(burst_end, horizon, n - n_burst + 1)[1:]
    return np.concatenate([burst, tail])


def _collect(
    times: Sequence[float],
    states: Iterable[np.ndarray],
    observer: Optional[SampleObserver],
    keep_states: bool,
) -> Tuple[np.ndarray, Dict[str, np.ndarray], Optional[np.ndarray]]:
    traces = []
    scalars: Dict[str, List[float]] = {}
    kept = []
    for rho in states:
        traces.append(float(np.real(np.trace(rho))))
        if observer is not None:
            for name, value in observer(rho).items():
                scalars.setdefault(name, []).append(value)
        if keep_states:
            kept.append(rho)
    if len(traces) != len(times):
        raise NumericalError(f"Engine produced {len(traces)} states for {len(times)} sample times")
    return (
        np.asarray(traces),
        {name: np.asarray(values) for name, values in scalars.items()},
        np.asarray(kept) if keep_states else None,
    )


def _check_monotonic(traces: np.ndarray, warnings: List[str]) -> None:
    growth = np.diff(traces)
    if growth.size and growth.max() > TRACE_MONOTONIC_SLACK:
        message = f"Trace increased by {growth.max():.3e} between samples"
        logger.warning(message)
        warnings.append(message)


def _eigenbasis_states(
    eigvals: np.ndarray,
    vectors: np.ndarray,
    rho0: np.ndarray,
    times: Sequence[float],
) -> Iterator[np.ndarray]:
    vectors_inv = scipy.linalg.inv(vectors)
    rho_tilde = vectors_inv @ rho0 @ vectors_inv.conj().T
    # rho_tilde_jk evolves as exp(-i (lambda_j - conj(lambda_k)) t)
    gaps = eigvals[:, None] - eigvals.conj()[None, :]
    vectors_dag = vectors.conj().T
    for t in times:
        rho_t = vectors @ (rho_tilde * np.exp(-1j * gaps * t)) @ vectors_dag
        yield 0.5 * (rho_t + rho_t.conj().T)


def propagate_eigenbasis(
    h_eff: np.ndarray,
    rho0: np.ndarray,
    times: Sequence[float],
    config: IntegratorConfig,
    observer: Optional[SampleObserver] = None,
    fallback_rhs: Optional[RhsFunction] = None,
) -> Trajectory:
    """
    Closed-form rho(t) = exp(-i H_eff t) rho0 exp(+i H_eff^dagger t).

    Args:
        h_eff: Non-Hermitian effective Hamiltonian (rad/s)
        rho0: Initial density matrix
        times: Sample times (s), strictly increasing
        config: Integrator configuration
        observer: Optional per-sample scalar extractor
        fallback_rhs: Master-equation right-hand side used when the
            eigenvector matrix is ill-conditioned

    Returns:
        Trajectory sampled at `times`
    """
    times = np.asarray(times, dtype=float)
    eigvals, vectors = scipy.linalg.eig(h_eff)
    condition = np.linalg.cond(vectors)

    if not np.isfinite(condition) or condition > config.max_condition:
        message = (
            f"Eigenvector condition number {condition:.3e} exceeds {config.max_condition:.1e}; "
            "falling back to runge_kutta_4"
        )
        if fallback_rhs is None:
            raise NumericalError(message)
        logger.warning(message)
        radius = float(np.linalg.norm(h_eff, 2))
        trajectory = propagate_rk4(
            fallback_rhs, rho0, config, horizon=float(times[-1]),
            times=times, spectral_radius=2 * radius, observer=observer,
        )
        trajectory.warnings.insert(0, message)
        trajectory.fell_back = True
        return trajectory

    logger.debug(f"Eigenbasis propagation: dimension {h_eff.shape[0]}, condition {condition:.2e}")
    traces, scalars, states = _collect(
        times, _eigenbasis_states(eigvals, vectors, rho0, times), observer, config.keep_states
    )
    trajectory = Trajectory(
        times=times, traces=traces, scalars=scalars, horizon=float(times[-1]),
        engine="eigenbasis", config=config, states=states,
    )
    _check_monotonic(traces, trajectory.warnings)
    return trajectory


def _rk4_step(rhs: RhsFunction, rho: np.ndarray, dt: float) -> np.ndarray:
    k1 = rhs(rho)
    k2 = rhs(rho + 0.5 * dt * k1)
    k3 = rhs(rho + 0.5 * dt * k2)
    k4 = rhs(rho + dt * k3)
    rho = rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return 0.5 * (rho + rho.conj().T)


def propagate_rk4(
    rhs: RhsFunction,
    rho0: np.ndarray,
    config: IntegratorConfig,
    horizon: float,
    times: Optional[Sequence[float]] = None,
    spectral_radius: Optional[float] = None,
    observer: Optional[SampleObserver] = None,
) -> Trajectory:
    """
    Classical fixed-step fourth-order Runge-Kutta integration.

    The step is shrunk so that dt * spectral_radius <= 0.1 and then
    adjusted to divide the horizon evenly. Samples are taken at the grid
    steps nearest to the requested times.

    Args:
        rhs: Master-equation right-hand side
        rho0: Initial density matrix
        config: Integrator configuration
        horizon: End time (s)
        times: Requested sample times; defaults to `sample_times(horizon, config)`
        spectral_radius: Estimate of the fastest rate in the generator (rad/s)
        observer: Optional per-sample scalar extractor

    Returns:
        Trajectory sampled on the step grid

    Raises:
        IntegrationError: If the trace grows beyond 1 + 1e-6
    """
    warnings: List[str] = []
    dt = config.dt
    if spectral_radius and dt * spectral_radius > MAX_STEP_PHASE:
        dt = MAX_STEP_PHASE / spectral_radius
        message = f"RK4 step reduced from {config.dt:.3e} s to {dt:.3e} s"
        logger.warning(message)
        warnings.append(message)

    steps = max(1, int(math.ceil(horizon / dt)))
    dt = horizon / steps
    targets = sample_times(horizon, config) if times is None else np.asarray(times, dtype=float)
    sample_steps = np.unique(np.clip(np.rint(targets / dt).astype(np.int64), 0, steps))
    logger.debug(f"RK4 propagation: {steps} steps of {dt:.3e} s, {len(sample_steps)} samples")

    def states() -> Iterator[np.ndarray]:
        rho = np.array(rho0, dtype=complex)
        step = 0
        for target in sample_steps:
            while step < target:
                rho = _rk4_step(rhs, rho, dt)
                step += 1
                trace = float(np.real(np.trace(rho)))
                if not math.isfinite(trace) or trace > 1.0 + TRACE_GROWTH_LIMIT:
                    raise IntegrationError(
                        f"Trace {trace:.6g} at t = {step * dt:.3e} s exceeds 1 + {TRACE_GROWTH_LIMIT:g}; "
                        f"step {dt:.3e} s is too large"
                    )
            yield rho.copy()

    sample_grid = sample_steps * dt
    traces, scalars, kept = _collect(sample_grid, states(), observer, config.keep_states)
    trajectory = Trajectory(
        times=sample_grid, traces=traces, scalars=scalars, horizon=horizon,
        engine="runge_kutta_4", config=config, states=kept, warnings=warnings,
    )
    _check_monotonic(traces, trajectory.warnings)
    return trajectory


def spectral_radius_estimate(model: ReactionModel) -> float:
    """Upper bound on the generator's fastest rate"""
    rates = model.rates
    return (
        2.0 * float(np.linalg.norm(model.hamiltonian, 2))
        + rates.k_r + rates.k_f + 8.0 * rates.k_dec
    )


def propagate(
    model: ReactionModel,
    config: IntegratorConfig,
    observer: Optional[SampleObserver] = None,
) -> Trajectory:
    """
    Propagate a reaction model to its horizon with the configured engine.

    Decoherence and the literal commutator bracket have no effective
    Hamiltonian, so they always use RK4.
    """
    config.validate()
    horizon = choose_horizon(model.rates, config.trace_eps)
    times = sample_times(horizon, config)

    engine = config.engine
    if engine == "eigenbasis" and not model.supports_effective_hamiltonian:
        logger.info("Decoherence or commutator bracket requested; using runge_kutta_4")
        engine = "runge_kutta_4"

    if engine == "eigenbasis":
        return propagate_eigenbasis(
            model.effective_hamiltonian(), model.rho0, times, config,
            observer=observer, fallback_rhs=model.rhs,
        )
    return propagate_rk4(
        model.rhs, model.rho0, config, horizon,
        spectral_radius=spectral_radius_estimate(model), observer=observer,
    )
