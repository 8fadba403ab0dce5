"""Coherence measures, time integrals and summary statistics"""

from src.observables.coherence import (
    CoherenceScope,
    as_scope,
    coherence,
    diagonal_entropy,
    make_observer,
    partial_trace_to_electrons,
    von_neumann_entropy,
)
from src.observables.integrals import (
    IntegratedCoherence,
    YieldPair,
    coherence_series,
    integrate_series,
    tail_decay_rate,
    total_coherence,
    yields,
)
from src.observables.statistics import (
    CoherenceCurve,
    CorrelationResult,
    DeltaM,
    delta_m,
    interaction_gap,
    pearson_fit,
)

__all__ = [
    'CoherenceScope',
    'as_scope',
    'coherence',
    'diagonal_entropy',
    'make_observer',
    'partial_trace_to_electrons',
    'von_neumann_entropy',
    'IntegratedCoherence',
    'YieldPair',
    'coherence_series',
    'integrate_series',
    'tail_decay_rate',
    'total_coherence',
    'yields',
    'CoherenceCurve',
    'CorrelationResult',
    'DeltaM',
    'delta_m',
    'interaction_gap',
    'pearson_fit',
]
