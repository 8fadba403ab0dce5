"""Run configuration with JSON-based persistence"""

import json
import logging
import math
from dataclasses import dataclass, asdict, field, fields, is_dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional

from src.errors import ConfigurationError
from src.spin_core.hamiltonian import (
    DEFAULT_MAX_DIMENSION,
    FIELD_CONVENTIONS,
    CouplingSpec,
    FieldSpec,
    dipolar_constant_from_distance,
)
from src.rp_model.master_equation import RateSpec
from src.rp_model.states import CissAngle


logger = logging.getLogger(__name__)

ENGINES = ("eigenbasis", "runge_kutta_4")
SAMPLERS = ("uniform", "front_loaded")
QUADRATURES = ("trapezoid", "simpson")


@dataclass
class FieldConfig:
    """Static magnetic field configuration"""
    b0_ut: float = 50.0
    theta: float = 0.0  # radians
    phi: float = 0.0  # radians
    convention: str = "standard_spherical"

    def to_spec(self) -> FieldSpec:
        return FieldSpec(b0=self.b0_ut, theta=self.theta, phi=self.phi, convention=self.convention)


@dataclass
class CouplingConfig:
    """Electron-electron coupling configuration"""
    j_mt: float = 0.0
    d_mt: float = 0.0
    r_nm: Optional[float] = None  # overrides d_mt through the point-dipole formula
    dipolar_axis: List[float] = field(default_factory=lambda: [0.0, 0.0, 1.0])
    dipolar_scale: float = 1.5

    @property
    def resolved_d_mt(self) -> float:
        if self.r_nm is not None:
            return dipolar_constant_from_distance(self.r_nm)
        return self.d_mt

    def to_spec(self) -> CouplingSpec:
        return CouplingSpec(
            j_exchange=self.j_mt,
            d_dipolar=self.resolved_d_mt,
            dipolar_axis=tuple(self.dipolar_axis),
            dipolar_scale=self.dipolar_scale,
        )


@dataclass
class RateConfig:
    """Reaction and decoherence rates (s^-1)"""
    k_f: float = 1e6
    k_r: float = 1e8
    k_dec: float = 0.0

    def to_spec(self) -> RateSpec:
        return RateSpec(k_f=self.k_f, k_r=self.k_r, k_dec=self.k_dec)


@dataclass
class ModelConfig:
    """Reaction-model switches"""
    paper_literal_bracket: bool = False
    max_dimension: int = DEFAULT_MAX_DIMENSION


@dataclass
class IntegratorConfig:
    """Time-propagation configuration"""
    dt: float = 2.5e-10
    trace_eps: float = 1e-6
    sample_count: int = 2000
    sampler: str = "front_loaded"
    engine: str = "eigenbasis"
    burst_fraction: float = 0.25  # share of samples in the initial uniform burst
    burst_window: float = 0.01  # burst length as a fraction of the horizon
    max_condition: float = 1e8
    keep_states: bool = False

    def validate(self) -> None:
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        if not 0 < self.trace_eps < 1:
            raise ConfigurationError(f"trace_eps must lie in (0, 1), got {self.trace_eps}")
        if int(self.sample_count) != self.sample_count or self.sample_count < 16:
            raise ConfigurationError(f"sample_count must be an integer >= 16, got {self.sample_count}")
        if self.sampler not in SAMPLERS:
            raise ConfigurationError(f"Unknown sampler '{self.sampler}'. Supported: {', '.join(SAMPLERS)}")
        if self.engine not in ENGINES:
            raise ConfigurationError(f"Unknown engine '{self.engine}'. Supported: {', '.join(ENGINES)}")
        if not 0 < self.burst_fraction < 1:
            raise ConfigurationError(f"burst_fraction must lie in (0, 1), got {self.burst_fraction}")
        if not 0 < self.burst_window < 1:
            raise ConfigurationError(f"burst_window must lie in (0, 1), got {self.burst_window}")
        if self.max_condition <= 1:
            raise ConfigurationError(f"max_condition must exceed 1, got {self.max_condition}")


@dataclass
class ObservableConfig:
    """Coherence and yield evaluation options"""
    renormalize_before_entropy: bool = False
    quadrature: str = "trapezoid"
    conservation_tolerance: float = 5e-3

    def validate(self) -> None:
        if self.quadrature not in QUADRATURES:
            raise ConfigurationError(
                f"Unknown quadrature '{self.quadrature}'. Supported: {', '.join(QUADRATURES)}"
            )
        if self.conservation_tolerance <= 0:
            raise ConfigurationError("conservation_tolerance must be positive")


@dataclass
class SweepConfig:
    """Sweep scheduling configuration"""
    workers: int = 1
    deterministic: bool = True
    max_points: int = 10_000

    def validate(self) -> None:
        if int(self.workers) != self.workers or self.workers < 1:
            raise ConfigurationError(f"workers must be a positive integer, got {self.workers}")
        if self.max_points < 1:
            raise ConfigurationError(f"max_points must be positive, got {self.max_points}")


@dataclass
class RunConfig:
    """Complete, resolved configuration of one simulation run"""
    system: str = "toy-1n1n"
    chi: float = 0.0  # radians
    magnetic_field: FieldConfig = field(default_factory=FieldConfig)
    coupling: CouplingConfig = field(default_factory=CouplingConfig)
    rates: RateConfig = field(default_factory=RateConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    observables: ObservableConfig = field(default_factory=ObservableConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    output_dir: str = "results"

    def validate(self) -> "RunConfig":
        """
        Check every parameter invariant.

        Returns:
            self, for chaining

        Raises:
            ConfigurationError: If any value is out of range
        """
        CissAngle(self.chi)
        self.magnetic_field.to_spec()
        self.coupling.to_spec()
        self.rates.to_spec()
        self.integrator.validate()
        self.observables.validate()
        self.sweep.validate()
        if self.magnetic_field.convention not in FIELD_CONVENTIONS:
            raise ConfigurationError(f"Unknown field convention '{self.magnetic_field.convention}'")
        if self.model.max_dimension < 4:
            raise ConfigurationError("max_dimension must be at least 4")
        return self

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigurationError("Configuration must be a JSON object")
        return _build_dataclass(cls, data, "")


def _build_dataclass(cls, data: Dict[str, Any], path: str):
    """Reconstruct nested dataclasses, rejecting unknown keys"""
    if not isinstance(data, dict):
        raise ConfigurationError(f"Section '{path or 'root'}' must be an object")

    known = {f.name: f for f in fields(cls)}
    unknown = set(data) - set(known)
    if unknown:
        raise ConfigurationError(
            f"Unknown configuration keys in '{path or 'root'}': {', '.join(sorted(unknown))}"
        )

    kwargs = {}
    for name, value in data.items():
        default = getattr(cls(), name)
        if is_dataclass(default):
            kwargs[name] = _build_dataclass(type(default), value, f"{path}.{name}".lstrip("."))
        else:
            kwargs[name] = value
    return cls(**kwargs)


class ConfigManager:
    """Manages loading and saving run configurations as JSON files"""

    def __init__(self, config_path: str):
        """
        Initialize ConfigManager.

        Args:
            config_path: Path to the JSON configuration file
        """
        self.config_path = Path(config_path)

    def load(self) -> RunConfig:
        """
        Load configuration from file.

        Returns:
            RunConfig with loaded settings, or the default config if the file
            doesn't exist

        Raises:
            ConfigurationError: If the file exists but cannot be parsed
        """
        if not self.config_path.exists():
            logger.info(f"No configuration at {self.config_path}, using defaults")
            return self.get_default()

        try:
            with open(self.config_path, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigurationError(
                f"Configuration file {self.config_path} is not valid JSON (line {e.lineno}): {e.msg}"
            ) from e
        except UnicodeDecodeError as e:
            raise ConfigurationError(f"Configuration file {self.config_path} is not UTF-8: {e}") from e

        try:
            return RunConfig.from_dict(data).validate()
        except TypeError as e:
            raise ConfigurationError(f"Configuration file {self.config_path} is malformed: {e}") from e

    def save(self, config: RunConfig) -> None:
        """
        Save configuration to file.

        Args:
            config: RunConfig to save
        """
        self.config_path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.config_path, 'w', encoding='utf-8') as f:
            json.dump(config.to_dict(), f, indent=2, ensure_ascii=False)

    def get_default(self) -> RunConfig:
        """
        Get default configuration.

        Returns:
            RunConfig with default values
        """
        return RunConfig()
