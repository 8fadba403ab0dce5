"""
Studies built on top of run_sweep.

Each study turns a set of sweep records into the curve or table it reports:
chi curves, interaction gaps, rate and decoherence tables, the nuclei table
and the orientation correlation.
"""

import logging
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.config.config_manager import RunConfig
from src.errors import ConfigurationError, NumericalError, UndefinedCorrelationError
from src.observables.coherence import CoherenceScope, ScopeLike, as_scope
from src.observables.statistics import (
    CoherenceCurve,
    CorrelationResult,
    delta_m,
    interaction_gap,
    pearson_fit,
)
from src.spin_core.hamiltonian import SpinSystemSpec
from src.sweep.sweep_engine import SweepAxis, SweepRecord, SweepSpec, run_sweep


logger = logging.getLogger(__name__)

CHI_ENDPOINTS = (0.0, math.pi / 2)
DEFAULT_CHI_GRID = (0.0, math.pi / 6, math.pi / 4, math.pi / 3, math.pi / 2)
SCOPE_OUTPUTS = {CoherenceScope.GLOBAL: "M_G", CoherenceScope.LOCAL: "M_L"}

PathLike = Union[str, Path]


def _checkpoint(directory: Optional[PathLike], name: str) -> Optional[Path]:
    """Checkpoint file of one sweep inside a checkpoint directory"""
    if not directory:
        return None
    return Path(directory) / f"{re.sub(r'[^A-Za-z0-9_.-]', '_', name)}.jsonl"


def _chi_axis(chis: Sequence[float]) -> SweepAxis:
    return SweepAxis("chi", tuple(chis))


def _group(records: Sequence[SweepRecord], axis: str) -> Dict[float, List[SweepRecord]]:
    """Records grouped by one coordinate, preserving first-seen order"""
    groups: Dict[float, List[SweepRecord]] = {}
    for record in records:
        groups.setdefault(record.coordinates[axis], []).append(record)
    return groups


def _at_chi(records: Sequence[SweepRecord], chi: float) -> Optional[SweepRecord]:
    for record in records:
        if abs(record.coordinates["chi"] - chi) <= 1e-12:
            return record
    return None


@dataclass
class DeltaRow:
    """Delta M for one setting, both scopes and both ratio definitions"""
    label: str
    value: float
    global_ciss: float = float("nan")
    global_maxmin: float = float("nan")
    local_ciss: float = float("nan")
    local_maxmin: float = float("nan")
    error: str = ""  # endpoint run missing or failed; affects both scopes
    global_error: str = ""
    local_error: str = ""

    @property
    def status(self) -> str:
        """'ok', 'partial' when only one scope failed, else 'error'"""
        if self.error or (self.global_error and self.local_error):
            return "error"
        if self.global_error or self.local_error:
            return "partial"
        return "ok"

    def message(self) -> str:
        parts = [self.error] if self.error else []
        parts += [f"{name}: {text}" for name, text in (("M_G", self.global_error), ("M_L", self.local_error)) if text]
        return "; ".join(parts)

    def to_row(self, value_name: str) -> Dict[str, Any]:
        return {
            value_name: self.value,
            "dM_G_ciss": self.global_ciss,
            "dM_G_maxmin": self.global_maxmin,
            "dM_L_ciss": self.local_ciss,
            "dM_L_maxmin": self.local_maxmin,
            "status": self.status,
            "error": self.message(),
        }


def delta_row(records: Sequence[SweepRecord], label: str = "", value: float = float("nan")) -> DeltaRow:
    """
    Delta M from the chi = 0 and chi = pi/2 records of one setting.

    Missing or failed endpoints leave NaN entries and an error message.
    Each scope is evaluated on its own, so a vanishing M_L(pi/2) does not
    hide a valid global ratio.
    """
    row = DeltaRow(label=label, value=value)
    low, high = (_at_chi(records, chi) for chi in CHI_ENDPOINTS)
    if low is None or high is None:
        row.error = "chi grid lacks 0 or pi/2"
        return row
    failed = [r.error for r in (low, high) if not r.ok]
    if failed:
        row.error = "; ".join(failed)
        return row
    for scope, output in SCOPE_OUTPUTS.items():
        try:
            ratios = delta_m(getattr(low, output), getattr(high, output))
        except NumericalError as e:
            setattr(row, f"{scope.value}_error", str(e))
            continue
        setattr(row, f"{scope.value}_ciss", ratios.ratio_ciss)
        setattr(row, f"{scope.value}_maxmin", ratios.ratio_maxmin)
    return row


def _curve(records: Sequence[SweepRecord], output: str) -> CoherenceCurve:
    return CoherenceCurve(
        chis=[r.coordinates["chi"] for r in records],
        values=[getattr(r, output) for r in records],
    )


@dataclass
class ChiCurveStudy:
    """M_G(chi) and M_L(chi) per coupling value"""
    axis: Optional[str]
    records: List[SweepRecord]
    global_curves: Dict[float, CoherenceCurve] = field(default_factory=dict)
    local_curves: Dict[float, CoherenceCurve] = field(default_factory=dict)
    summary: List[DeltaRow] = field(default_factory=list)

    def summary_rows(self) -> List[Dict[str, Any]]:
        return [row.to_row(self.axis or "setting") for row in self.summary]


def _coupling_axis(
    dipolar_values: Optional[Sequence[float]],
    exchange_values: Optional[Sequence[float]],
) -> Optional[SweepAxis]:
    if dipolar_values and exchange_values:
        raise ConfigurationError("Sweep either dipolar or exchange values, not both")
    if dipolar_values:
        return SweepAxis("d_mt", tuple(dipolar_values))
    if exchange_values:
        return SweepAxis("j_mt", tuple(exchange_values))
    return None


def _by_coupling(records: List[SweepRecord], axis: Optional[SweepAxis]) -> Dict[float, List[SweepRecord]]:
    return {float("nan"): records} if axis is None else _group(records, axis.name)


def chi_curves(
    chis: Sequence[float],
    base: RunConfig,
    system: SpinSystemSpec,
    dipolar_values: Optional[Sequence[float]] = None,
    exchange_values: Optional[Sequence[float]] = None,
    workers: Optional[int] = None,
    checkpoint_dir: Optional[PathLike] = None,
) -> ChiCurveStudy:
    """
    Total coherence versus chi, optionally for several D or J values (mT).

    Raises:
        ConfigurationError: If both dipolar and exchange lists are given
    """
    coupling = _coupling_axis(dipolar_values, exchange_values)
    axes = [coupling, _chi_axis(chis)] if coupling else [_chi_axis(chis)]
    records = run_sweep(SweepSpec(axes, base), system, workers, _checkpoint(checkpoint_dir, "chi_sweep"))

    axis_name = coupling.name if coupling else None
    study = ChiCurveStudy(axis=axis_name, records=records)
    for value, group in _by_coupling(records, coupling).items():
        study.global_curves[value] = _curve(group, "M_G")
        study.local_curves[value] = _curve(group, "M_L")
        study.summary.append(delta_row(group, axis_name or "", value))
    return study


@dataclass
class GapStudy:
    """Delta_G(chi) and Delta_L(chi): coupling-free minus coupled totals, per coupling value"""
    axis: Optional[str]
    baseline: List[SweepRecord]
    coupled: Dict[float, List[SweepRecord]]
    global_gaps: Dict[float, CoherenceCurve] = field(default_factory=dict)
    local_gaps: Dict[float, CoherenceCurve] = field(default_factory=dict)

    def _only(self, curves: Dict[float, CoherenceCurve]) -> CoherenceCurve:
        if len(curves) != 1:
            raise ConfigurationError(f"Study has {len(curves)} gap curves; select one by coupling value")
        return next(iter(curves.values()))

    @property
    def global_gap(self) -> CoherenceCurve:
        return self._only(self.global_gaps)

    @property
    def local_gap(self) -> CoherenceCurve:
        return self._only(self.local_gaps)

    def rows(self) -> List[Dict[str, Any]]:
        """One row per (coupling value, chi); the coupling column only with a list"""
        rows = []
        for value, coupled in self.coupled.items():
            g_curve, l_curve = self.global_gaps[value], self.local_gaps[value]
            for chi, g, l, b, c in zip(g_curve.chis, g_curve.values, l_curve.values, self.baseline, coupled):
                row: Dict[str, Any] = {self.axis: value} if self.axis else {}
                row.update({
                    "chi": float(chi),
                    "gap_G": float(g),
                    "gap_L": float(l),
                    "status": "ok" if b.ok and c.ok else "error",
                    "error": "; ".join(r.error for r in (b, c) if r.error),
                })
                rows.append(row)
        return rows


def gap_curves(
    chis: Sequence[float],
    base: RunConfig,
    system: SpinSystemSpec,
    dipolar_values: Optional[Sequence[float]] = None,
    exchange_values: Optional[Sequence[float]] = None,
    workers: Optional[int] = None,
    checkpoint_dir: Optional[PathLike] = None,
) -> GapStudy:
    """
    Effect of the electron-electron couplings on M_G and M_L.

    The baseline is `base` with J = D = 0. The coupled runs use the
    couplings of `base`, or one run per value of a D or J list (mT).

    Raises:
        ConfigurationError: If both dipolar and exchange lists are given
    """
    coupling = _coupling_axis(dipolar_values, exchange_values)
    free = replace(base, coupling=replace(base.coupling, j_mt=0.0, d_mt=0.0, r_nm=None))
    baseline = run_sweep(
        SweepSpec([_chi_axis(chis)], free), system, workers, _checkpoint(checkpoint_dir, "gap_baseline"),
    )
    axes = [coupling, _chi_axis(chis)] if coupling else [_chi_axis(chis)]
    coupled = run_sweep(
        SweepSpec(axes, base), system, workers, _checkpoint(checkpoint_dir, "gap_coupled"),
    )

    study = GapStudy(axis=coupling.name if coupling else None, baseline=baseline, coupled={})
    for value, group in _by_coupling(coupled, coupling).items():
        study.coupled[value] = group
        study.global_gaps[value] = interaction_gap(_curve(baseline, "M_G"), _curve(group, "M_G"))
        study.local_gaps[value] = interaction_gap(_curve(baseline, "M_L"), _curve(group, "M_L"))
    return study


@dataclass
class RateTable:
    """Delta M over a (k_R, k_F) grid; rows are k_R, columns k_F"""
    kf_values: Tuple[float, ...]
    kr_values: Tuple[float, ...]
    global_ciss: np.ndarray
    local_ciss: np.ndarray
    global_maxmin: np.ndarray
    local_maxmin: np.ndarray
    errors: Dict[Tuple[int, int], str] = field(default_factory=dict)
    records: List[SweepRecord] = field(default_factory=list)

    def table_rows(self, scope: ScopeLike, ratio: str = "ciss") -> List[Dict[str, Any]]:
        """One row per k_R with one column per k_F"""
        scope = as_scope(scope)
        name = f"{scope.value}_{ratio}"
        if not hasattr(self, name):
            raise ConfigurationError(f"Unknown ratio '{ratio}'")
        matrix = getattr(self, name)
        return [
            {"k_R": kr, **{f"k_F={kf:g}": float(matrix[i, j]) for j, kf in enumerate(self.kf_values)}}
            for i, kr in enumerate(self.kr_values)
        ]


def rate_table(
    kf_values: Sequence[float],
    kr_values: Sequence[float],
    base: RunConfig,
    system: SpinSystemSpec,
    workers: Optional[int] = None,
    checkpoint_dir: Optional[PathLike] = None,
) -> RateTable:
    """
    Delta M for every (k_F, k_R) pair from runs at chi = 0 and chi = pi/2.

    Raises:
        ConfigurationError: If any rate is not positive
    """
    for name, values in (("k_F", kf_values), ("k_R", kr_values)):
        if not values or any(not (math.isfinite(v) and v > 0) for v in values):
            raise ConfigurationError(f"{name} values must be positive, got {list(values)}")

    axes = [SweepAxis("k_r", tuple(kr_values)), SweepAxis("k_f", tuple(kf_values)), _chi_axis(CHI_ENDPOINTS)]
    records = run_sweep(SweepSpec(axes, base), system, workers, _checkpoint(checkpoint_dir, "rate_table"))

    shape = (len(kr_values), len(kf_values))
    table = RateTable(
        kf_values=tuple(float(v) for v in kf_values),
        kr_values=tuple(float(v) for v in kr_values),
        global_ciss=np.full(shape, np.nan),
        local_ciss=np.full(shape, np.nan),
        global_maxmin=np.full(shape, np.nan),
        local_maxmin=np.full(shape, np.nan),
        records=records,
    )
    # Row-major with chi fastest: each consecutive pair is one cell
    for cell in range(shape[0] * shape[1]):
        i, j = divmod(cell, shape[1])
        row = delta_row(records[2 * cell: 2 * cell + 2])
        if row.status != "ok":
            table.errors[(i, j)] = row.message()
            logger.warning(f"Rate table cell k_R={kr_values[i]:g}, k_F={kf_values[j]:g}: {row.message()}")
        table.global_ciss[i, j] = row.global_ciss
        table.local_ciss[i, j] = row.local_ciss
        table.global_maxmin[i, j] = row.global_maxmin
        table.local_maxmin[i, j] = row.local_maxmin
    return table


def decoherence_table(
    k_values: Sequence[float],
    base: RunConfig,
    system: SpinSystemSpec,
    workers: Optional[int] = None,
    checkpoint_dir: Optional[PathLike] = None,
) -> List[DeltaRow]:
    """Delta M_G and Delta M_L for each electron decoherence rate (s^-1)"""
    axes = [SweepAxis("k_dec", tuple(k_values)), _chi_axis(CHI_ENDPOINTS)]
    records = run_sweep(SweepSpec(axes, base), system, workers, _checkpoint(checkpoint_dir, "decoherence_table"))
    return [delta_row(group, "k_dec", value) for value, group in _group(records, "k_dec").items()]


def nuclei_table(
    systems: Sequence[SpinSystemSpec],
    base: RunConfig,
    workers: Optional[int] = None,
    checkpoint_dir: Optional[PathLike] = None,
) -> List[DeltaRow]:
    """Delta M_G and Delta M_L for each spin system, e.g. 2, 4 and 6 nuclei"""
    rows = []
    for i, system in enumerate(systems):
        path = _checkpoint(checkpoint_dir, f"nuclei_{i}_{system.label}")
        records = run_sweep(SweepSpec([_chi_axis(CHI_ENDPOINTS)], base), system, workers, path)
        rows.append(delta_row(records, system.label, float(system.nucleus_count)))
    return rows


@dataclass(frozen=True)
class OrientationGrid:
    """Field directions: theta inclusive on [0, pi], phi on [0, 2pi) without the endpoint"""
    thetas: Tuple[float, ...]
    phis: Tuple[float, ...]

    def __len__(self) -> int:
        return len(self.thetas) * len(self.phis)

    def axes(self) -> List[SweepAxis]:
        return [SweepAxis("theta", self.thetas), SweepAxis("phi", self.phis)]


def orientation_grid(n_theta: int = 50, n_phi: int = 50) -> OrientationGrid:
    """
    Uniform orientation grid with n_theta * n_phi directions.

    Raises:
        ConfigurationError: If either count is below 1
    """
    if n_theta < 1 or n_phi < 1:
        raise ConfigurationError(f"Orientation grid needs positive counts, got {n_theta}x{n_phi}")
    thetas = np.linspace(0.0, math.pi, n_theta)
    phis = np.linspace(0.0, 2 * math.pi, n_phi, endpoint=False)
    return OrientationGrid(tuple(float(t) for t in thetas), tuple(float(p) for p in phis))


@dataclass
class CorrelationStudy:
    """Per-orientation scatter and the M_i versus phi_F fit for each scope"""
    chi: float
    records: List[SweepRecord]
    fits: Dict[CoherenceScope, CorrelationResult] = field(default_factory=dict)
    errors: Dict[CoherenceScope, str] = field(default_factory=dict)

    def fit(self, scope: ScopeLike) -> CorrelationResult:
        """
        Raises:
            UndefinedCorrelationError: If the fit for this scope failed
        """
        scope = as_scope(scope)
        if scope not in self.fits:
            raise UndefinedCorrelationError(self.errors.get(scope, f"No fit for scope {scope.value}"))
        return self.fits[scope]

    def fit_rows(self) -> List[Dict[str, Any]]:
        rows = []
        for scope in (CoherenceScope.GLOBAL, CoherenceScope.LOCAL):
            result = self.fits.get(scope)
            rows.append({
                "scope": scope.value,
                "chi": self.chi,
                "r": result.r if result else float("nan"),
                "slope": result.slope if result else float("nan"),
                "intercept": result.intercept if result else float("nan"),
                "n": result.n if result else 0,
                "error": self.errors.get(scope, ""),
            })
        return rows


def correlation_study(
    grid: OrientationGrid,
    chi: float,
    base: RunConfig,
    system: SpinSystemSpec,
    workers: Optional[int] = None,
    checkpoint_dir: Optional[PathLike] = None,
) -> CorrelationStudy:
    """
    Sweep the field direction at fixed chi and correlate M_G, M_L with phi_F.

    Failed orientations are left out of the fits. An undefined correlation
    (constant series, fewer than 3 points) is stored per scope rather than
    raised; `CorrelationStudy.fit` raises it on access.
    """
    spec = SweepSpec(grid.axes(), replace(base, chi=float(chi)), outputs=("M_G", "M_L", "phi_F"))
    records = run_sweep(spec, system, workers, _checkpoint(checkpoint_dir, "correlate"))
    study = CorrelationStudy(chi=float(chi), records=records)

    good = [r for r in records if r.ok]
    phi_f = [r.phi_F for r in good]
    for scope, output in SCOPE_OUTPUTS.items():
        try:
            study.fits[scope] = pearson_fit([getattr(r, output) for r in good], phi_f)
            logger.info(f"R({output}, phi_F) at chi={chi:.4f}: {study.fits[scope].r:.4f}")
        except UndefinedCorrelationError as e:
            study.errors[scope] = str(e)
            logger.warning(f"R({output}, phi_F) undefined: {e}")
    return study
