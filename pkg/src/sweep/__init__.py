"""Parameter sweeps and the studies built from them"""

from .sweep_engine import (
    AXIS_TARGETS,
    OUTPUTS,
    SweepAxis,
    SweepSpec,
    SweepRecord,
    apply_axis,
    checkpoint_header,
    config_at,
    evaluate_point,
    run_sweep,
    records_to_rows,
)
from .studies import (
    DEFAULT_CHI_GRID,
    ChiCurveStudy,
    CorrelationStudy,
    DeltaRow,
    GapStudy,
    OrientationGrid,
    RateTable,
    chi_curves,
    correlation_study,
    decoherence_table,
    delta_row,
    gap_curves,
    nuclei_table,
    orientation_grid,
    rate_table,
)

__all__ = [
    "AXIS_TARGETS",
    "OUTPUTS",
    "SweepAxis",
    "SweepSpec",
    "SweepRecord",
    "apply_axis",
    "checkpoint_header",
    "config_at",
    "evaluate_point",
    "run_sweep",
    "records_to_rows",
    "DEFAULT_CHI_GRID",
    "ChiCurveStudy",
    "CorrelationStudy",
    "DeltaRow",
    "GapStudy",
    "OrientationGrid",
    "RateTable",
    "chi_curves",
    "correlation_study",
    "decoherence_table",
    "delta_row",
    "gap_curves",
    "nuclei_table",
    "orientation_grid",
    "rate_table",
]
