"""
Parameter sweeps over run configurations.

Every grid point runs the full single-threaded pipeline (Hamiltonian, reaction
model, propagation, integrals). Points are independent, so they are scheduled
on a thread pool and merged back in row-major grid order.
"""

import copy
import itertools
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from threading import Lock
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.config.config_manager import RunConfig
from src.errors import ConfigurationError, GridSizeError, NumericalError
from src.observables.coherence import CoherenceScope, make_observer
from src.observables.integrals import total_coherence, yields
from src.propagation.propagator import propagate
from src.rp_model.master_equation import build_reaction_model
from src.spin_core.hamiltonian import SpinSystemSpec


logger = logging.getLogger(__name__)

# Axis name -> (section of RunConfig or None for top level, attribute)
AXIS_TARGETS: Dict[str, Tuple[Optional[str], str]] = {
    "chi": (None, "chi"),
    "theta": ("magnetic_field", "theta"),
    "phi": ("magnetic_field", "phi"),
    "b0_ut": ("magnetic_field", "b0_ut"),
    "j_mt": ("coupling", "j_mt"),
    "d_mt": ("coupling", "d_mt"),
    "r_nm": ("coupling", "r_nm"),
    "k_f": ("rates", "k_f"),
    "k_r": ("rates", "k_r"),
    "k_dec": ("rates", "k_dec"),
}

OUTPUTS = ("M_G", "M_L", "phi_F", "phi_R")
FLAG_COLUMNS = ("horizon_reached", "yield_conserved", "engine", "fell_back", "status", "error")


@dataclass(frozen=True)
class SweepAxis:
    """One swept parameter and its values, in sweep order"""
    name: str
    values: Tuple[float, ...]

    def __post_init__(self):
        if self.name not in AXIS_TARGETS:
            raise ConfigurationError(
                f"Unknown sweep axis '{self.name}'. Supported: {', '.join(AXIS_TARGETS)}"
            )
        values = tuple(float(v) for v in self.values)
        if not values:
            raise ConfigurationError(f"Sweep axis '{self.name}' has no values")
        object.__setattr__(self, "values", values)


@dataclass
class SweepSpec:
    """Cartesian grid of axes applied on top of a base configuration"""
    axes: List[SweepAxis]
    base: RunConfig = field(default_factory=RunConfig)
    outputs: Tuple[str, ...] = OUTPUTS

    def __post_init__(self):
        if not self.axes:
            raise ConfigurationError("A sweep needs at least one axis")
        names = [axis.name for axis in self.axes]
        if len(set(names)) != len(names):
            raise ConfigurationError(f"Duplicate sweep axes: {names}")
        unknown = set(self.outputs) - set(OUTPUTS)
        if unknown:
            raise ConfigurationError(f"Unknown outputs: {', '.join(sorted(unknown))}")

    @property
    def axis_names(self) -> List[str]:
        return [axis.name for axis in self.axes]

    @property
    def size(self) -> int:
        return math.prod(len(axis.values) for axis in self.axes)

    def points(self) -> List[Dict[str, float]]:
        """Grid coordinates in row-major order (last axis fastest)"""
        return [
            dict(zip(self.axis_names, combo))
            for combo in itertools.product(*(axis.values for axis in self.axes))
        ]


@dataclass
class SweepRecord:
    """Inputs, outputs and convergence flags of one grid point"""
    index: int
    coordinates: Dict[str, float]
    M_G: float = float("nan")
    M_L: float = float("nan")
    phi_F: float = float("nan")
    phi_R: float = float("nan")
    M_G_tail: float = float("nan")
    M_L_tail: float = float("nan")
    yield_tail: float = float("nan")
    horizon_reached: bool = False
    yield_conserved: bool = False
    engine: str = ""
    fell_back: bool = False
    status: str = "ok"
    error: str = ""
    wall_time_s: float = 0.0

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_row(self, outputs: Sequence[str] = OUTPUTS, include_wall_time: bool = False) -> Dict[str, Any]:
        """Flat row: axes first, outputs and tails after, flags last"""
        row: Dict[str, Any] = dict(self.coordinates)
        for name in outputs:
            row[name] = getattr(self, name)
        if "M_G" in outputs:
            row["M_G_tail"] = self.M_G_tail
        if "M_L" in outputs:
            row["M_L_tail"] = self.M_L_tail
        if "phi_F" in outputs or "phi_R" in outputs:
            row["yield_tail"] = self.yield_tail
        for name in FLAG_COLUMNS:
            row[name] = getattr(self, name)
        if include_wall_time:
            row["wall_time_s"] = self.wall_time_s
        return row

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "SweepRecord":
        return cls(**json.loads(line))


def apply_axis(config: RunConfig, name: str, value: float) -> RunConfig:
    """Copy of config with one swept parameter replaced"""
    if name not in AXIS_TARGETS:
        raise ConfigurationError(f"Unknown sweep axis '{name}'")
    updated = copy.deepcopy(config)
    section, attribute = AXIS_TARGETS[name]
    target = updated if section is None else getattr(updated, section)
    setattr(target, attribute, float(value))
    if name == "d_mt":
        updated.coupling.r_nm = None
    return updated


def config_at(base: RunConfig, coordinates: Dict[str, float]) -> RunConfig:
    config = base
    for name, value in coordinates.items():
        config = apply_axis(config, name, value)
    return config


def evaluate_point(
    config: RunConfig,
    system: SpinSystemSpec,
    index: int = 0,
    coordinates: Optional[Dict[str, float]] = None,
) -> SweepRecord:
    """
    Run the full pipeline for one configuration.

    Args:
        config: Resolved run configuration
        system: Spin system the configuration refers to
        index: Grid index stored on the record
        coordinates: Axis values stored on the record

    Returns:
        SweepRecord with M_G, M_L, phi_F, phi_R and convergence flags

    Raises:
        ConfigurationError: If the configuration is invalid
        NumericalError: If propagation or an observable fails
    """
    start = time.perf_counter()
    config.validate()
    rates = config.rates.to_spec()
    model = build_reaction_model(
        system,
        config.chi,
        config.magnetic_field.to_spec(),
        config.coupling.to_spec(),
        rates,
        paper_literal_bracket=config.model.paper_literal_bracket,
        max_dimension=config.model.max_dimension,
    )
    options = config.observables
    observer = make_observer(model.psi_r, system, options.renormalize_before_entropy)
    trajectory = propagate(model, config.integrator, observer)

    m_g = total_coherence(trajectory, CoherenceScope.GLOBAL, rates, quadrature=options.quadrature)
    m_l = total_coherence(trajectory, CoherenceScope.LOCAL, rates, quadrature=options.quadrature)
    pair = yields(
        trajectory, model.projector, rates,
        quadrature=options.quadrature, tolerance=options.conservation_tolerance,
    )

    record = SweepRecord(
        index=index,
        coordinates=dict(coordinates or {}),
        M_G=m_g.value,
        M_L=m_l.value,
        phi_F=pair.phi_f,
        phi_R=pair.phi_r,
        M_G_tail=m_g.tail_error,
        M_L_tail=m_l.tail_error,
        yield_tail=pair.tail_error,
        horizon_reached=trajectory.horizon_reached,
        yield_conserved=pair.conserved,
        engine=trajectory.engine,
        fell_back=trajectory.fell_back,
        wall_time_s=time.perf_counter() - start,
    )
    outputs = (record.M_G, record.M_L, record.phi_F, record.phi_R)
    if not all(math.isfinite(v) for v in outputs):
        raise NumericalError(f"Non-finite output at point {index}: {outputs}")
    return record


def _evaluate_safely(
    index: int,
    coordinates: Dict[str, float],
    base: RunConfig,
    system: SpinSystemSpec,
) -> SweepRecord:
    try:
        return evaluate_point(config_at(base, coordinates), system, index, coordinates)
    except (ValueError, RuntimeError, np.linalg.LinAlgError) as e:
        logger.warning(f"Sweep point {index} {coordinates} failed: {e}")
        return SweepRecord(
            index=index, coordinates=dict(coordinates),
            status="error", error=f"{type(e).__name__}: {e}",
        )


def checkpoint_header(spec: SweepSpec, system: SpinSystemSpec) -> Dict[str, Any]:
    """
    Everything that decides the records of a sweep.

    Scheduling options (workers, determinism) and the output directory are
    left out; a checkpoint may be resumed with other values for them.
    """
    run = spec.base.to_dict()
    for key in ("sweep", "output_dir", "system"):
        run.pop(key, None)
    header = {
        "checkpoint": {
            "axes": [[axis.name, list(axis.values)] for axis in spec.axes],
            "run": run,
            "system": {
                "label": system.label,
                "donor": [[n.multiplicity, n.tensor.tolist()] for n in system.donor_nuclei],
                "acceptor": [[n.multiplicity, n.tensor.tolist()] for n in system.acceptor_nuclei],
            },
        }
    }
    # Compare in the form it takes after a trip through the file
    return json.loads(json.dumps(header, sort_keys=True))


def _load_checkpoint(
    path: Path,
    points: List[Dict[str, float]],
    header: Dict[str, Any],
) -> Dict[int, SweepRecord]:
    """
    Finished records from an earlier run of the same sweep.

    Raises:
        ConfigurationError: If the file was written for another grid,
            configuration or spin system
    """
    if not path.exists() or not path.stat().st_size:
        return {}
    done: Dict[int, SweepRecord] = {}
    with open(path, 'r', encoding='utf-8') as f:
        lines = [(n, line) for n, line in enumerate(f, start=1) if line.strip()]
    if not lines:
        return {}

    line_number, first = lines[0]
    try:
        stored = json.loads(first)
    except json.JSONDecodeError:
        stored = None
    if not isinstance(stored, dict) or "checkpoint" not in stored:
        raise ConfigurationError(f"Checkpoint {path} has no header line; remove it to start over")
    if stored != header:
        raise ConfigurationError(
            f"Checkpoint {path} was written for a different configuration, grid or system; "
            f"remove it or choose another output directory"
        )

    for line_number, line in lines[1:]:
        try:
            record = SweepRecord.from_json(line)
        except (json.JSONDecodeError, TypeError) as e:
            # A partially written last line is expected after an interruption
            logger.warning(f"Skipping unreadable checkpoint line {line_number} in {path}: {e}")
            continue
        if record.index >= len(points) or record.coordinates != points[record.index]:
            raise ConfigurationError(
                f"Checkpoint {path} does not match this sweep (line {line_number})"
            )
        done[record.index] = record
    logger.info(f"Resuming sweep: {len(done)} of {len(points)} points already in {path}")
    return done


def _prepare_checkpoint(path: Path, header: Dict[str, Any]) -> None:
    """Write the header to a new file, or end a torn last line of an old one"""
    path.parent.mkdir(parents=True, exist_ok=True)
    if not path.exists() or not path.read_text(encoding='utf-8').strip():
        with open(path, 'w', encoding='utf-8') as f:
            f.write(json.dumps(header, sort_keys=True) + "\n")
        return
    with open(path, 'rb') as f:
        f.seek(-1, 2)
        torn = f.read(1) != b"\n"
    if torn:
        with open(path, 'a', encoding='utf-8') as f:
            f.write("\n")


def run_sweep(
    spec: SweepSpec,
    system: SpinSystemSpec,
    workers: Optional[int] = None,
    checkpoint_path: Optional[Union[str, Path]] = None,
) -> List[SweepRecord]:
    """
    Evaluate every grid point of a sweep.

    Failed points produce records with status "error" instead of aborting.

    Args:
        spec: Axes and base configuration
        system: Spin system shared by all points
        workers: Thread count; defaults to base.sweep.workers
        checkpoint_path: JSON-lines file: a header line describing the sweep,
            then one record per finished point. Finished points are skipped
            when it exists

    Returns:
        One record per grid point, in row-major order

    Raises:
        GridSizeError: If the grid exceeds base.sweep.max_points
        ConfigurationError: If the checkpoint belongs to another sweep
    """
    cap = spec.base.sweep.max_points
    if spec.size > cap:
        raise GridSizeError(f"Sweep has {spec.size} points, above the cap of {cap}")

    workers = workers or spec.base.sweep.workers
    points = spec.points()
    checkpoint = Path(checkpoint_path) if checkpoint_path else None
    header = checkpoint_header(spec, system) if checkpoint else {}
    done = _load_checkpoint(checkpoint, points, header) if checkpoint else {}
    pending = [i for i in range(len(points)) if i not in done]

    logger.info(
        f"Sweep over {', '.join(spec.axis_names)}: {len(points)} points "
        f"({len(pending)} pending) on {system.label or 'system'} with {workers} worker(s)"
    )

    checkpoint_lock = Lock()
    if checkpoint:
        _prepare_checkpoint(checkpoint, header)

    def run(index: int) -> SweepRecord:
        record = _evaluate_safely(index, points[index], spec.base, system)
        if checkpoint:
            with checkpoint_lock:
                with open(checkpoint, 'a', encoding='utf-8') as f:
                    f.write(record.to_json() + "\n")
        return record

    if workers == 1:
        finished = [run(i) for i in pending]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            finished = list(executor.map(run, pending))

    results = dict(done)
    results.update({record.index: record for record in finished})
    records = [results[i] for i in range(len(points))]

    failures = sum(not record.ok for record in records)
    if failures:
        logger.warning(f"Sweep finished with {failures} failed point(s)")
    else:
        logger.info(f"Sweep finished: {len(records)} points")
    return records


def records_to_rows(
    records: Sequence[SweepRecord],
    outputs: Sequence[str] = OUTPUTS,
    deterministic: bool = True,
) -> List[Dict[str, Any]]:
    """CSV-ready rows; wall time is omitted in deterministic mode"""
    return [record.to_row(outputs, include_wall_time=not deterministic) for record in records]
