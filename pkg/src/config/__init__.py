"""Run configuration and spin-system files"""

from .config_manager import (
    RunConfig,
    FieldConfig,
    CouplingConfig,
    RateConfig,
    ModelConfig,
    IntegratorConfig,
    ObservableConfig,
    SweepConfig,
    ConfigManager,
)
from .system_file import (
    parse_system,
    parse_system_file,
    resolve_system_path,
    bundled_systems,
)

__all__ = [
    "RunConfig",
    "FieldConfig",
    "CouplingConfig",
    "RateConfig",
    "ModelConfig",
    "IntegratorConfig",
    "ObservableConfig",
    "SweepConfig",
    "ConfigManager",
    "parse_system",
    "parse_system_file",
    "resolve_system_path",
    "bundled_systems",
]
