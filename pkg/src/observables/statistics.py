"""Summary statistics over coherence curves"""

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from src.errors import DimensionError, NumericalError, UndefinedCorrelationError


# Relative spread below which a series counts as constant
CONSTANT_SERIES_TOLERANCE = 1e-14


@dataclass(frozen=True)
class DeltaM:
    """Contrast between the CISS-free and fully polarized totals"""
    ratio_maxmin: float  # max(M0, M90) / min(M0, M90)
    ratio_ciss: float  # M90 / M0


def delta_m(m0: float, m90: float) -> DeltaM:
    """
    Ratios of total coherence at chi = 0 and chi = pi/2.

    Raises:
        NumericalError: If either total is non-positive or not finite
    """
    for name, value in (("M(0)", m0), ("M(pi/2)", m90)):
        if not math.isfinite(value) or value <= 0:
            raise NumericalError(f"{name} must be positive and finite, got {value}")
    return DeltaM(ratio_maxmin=max(m0, m90) / min(m0, m90), ratio_ciss=m90 / m0)


@dataclass
class CoherenceCurve:
    """M_i sampled over a chi grid"""
    chis: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.chis = np.asarray(self.chis, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.chis.shape != self.values.shape or self.chis.ndim != 1:
            raise DimensionError(
                f"Curve needs matching 1-D arrays, got {self.chis.shape} and {self.values.shape}"
            )


def interaction_gap(baseline: CoherenceCurve, other: CoherenceCurve) -> CoherenceCurve:
    """
    Pointwise difference baseline - other on a shared chi grid.

    Raises:
        DimensionError: If the chi grids differ
    """
    if baseline.chis.shape != other.chis.shape or not np.allclose(
        baseline.chis, other.chis, rtol=0.0, atol=1e-12
    ):
        raise DimensionError("Curves are sampled on different chi grids")
    return CoherenceCurve(chis=baseline.chis.copy(), values=baseline.values - other.values)


@dataclass(frozen=True)
class CorrelationResult:
    """Pearson correlation and least-squares line"""
    r: float
    slope: float
    intercept: float
    n: int


def _is_constant(values: np.ndarray) -> bool:
    return float(np.std(values)) <= CONSTANT_SERIES_TOLERANCE * max(1.0, abs(float(np.mean(values))))


def pearson_fit(xs: Sequence[float], ys: Sequence[float]) -> CorrelationResult:
    """
    Pearson r with the ordinary least-squares fit y = slope * x + intercept.

    Raises:
        DimensionError: If the series differ in length
        UndefinedCorrelationError: With fewer than 3 points or a constant series
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape:
        raise DimensionError(f"Series lengths differ: {xs.size} vs {ys.size}")
    if xs.size < 3:
        raise UndefinedCorrelationError(f"Correlation needs at least 3 points, got {xs.size}")
    if _is_constant(xs) or _is_constant(ys):
        raise UndefinedCorrelationError("Correlation undefined for a constant series")

    fit = stats.linregress(xs, ys)
    return CorrelationResult(
        r=float(np.clip(fit.rvalue, -1.0, 1.0)),
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        n=int(xs.size),
    )
