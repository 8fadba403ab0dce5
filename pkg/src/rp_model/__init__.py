"""Radical-pair reaction model: CISS states, recombination and master equation"""

from .states import (
    CissAngle,
    as_chi,
    initial_electronic_state,
    recombination_state,
    initial_density,
    recombination_projector,
)
from .master_equation import (
    RateSpec,
    ReactionModel,
    build_reaction_model,
    collapse_operators,
    dissipator,
    master_rhs,
    effective_hamiltonian,
)

__all__ = [
    "CissAngle",
    "as_chi",
    "initial_electronic_state",
    "recombination_state",
    "initial_density",
    "recombination_projector",
    "RateSpec",
    "ReactionModel",
    "build_reaction_model",
    "collapse_operators",
    "dissipator",
    "master_rhs",
    "effective_hamiltonian",
]
