"""Time propagation of the radical-pair density matrix"""

from .propagator import (
    Trajectory,
    TrajectorySample,
    SampleObserver,
    choose_horizon,
    sample_times,
    propagate,
    propagate_eigenbasis,
    propagate_rk4,
    spectral_radius_estimate,
)

__all__ = [
    "Trajectory",
    "TrajectorySample",
    "SampleObserver",
    "choose_horizon",
    "sample_times",
    "propagate",
    "propagate_eigenbasis",
    "propagate_rk4",
    "spectral_radius_estimate",
]
