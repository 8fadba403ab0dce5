"""Spin-system description files (JSON)

Schema::

    {
      "label": "toy-1n1n",
      "description": "...",
      "radicals": [
        {"name": "donor", "role": "donor",
         "nuclei": [{"multiplicity": 2, "tensor_mT": [[...], [...], [...]]}]},
        {"name": "acceptor", "role": "acceptor", "nuclei": [...]}
      ]
    }

`tensor_mT` is a 3x3 matrix in mT or a single number for an isotropic
coupling. `role` is optional; without it the first radical is the donor.
"""

import json
import logging
import math
from pathlib import Path
from typing import Any, List, Union

import numpy as np

from src.errors import ConfigurationError, SystemFileError
from src.spin_core.hamiltonian import Nucleus, SpinSystemSpec


logger = logging.getLogger(__name__)

BUNDLED_SYSTEMS_DIR = Path(__file__).parent / "systems"

ROLES = ("donor", "acceptor")


def bundled_systems() -> List[str]:
    """Names of the systems shipped with the package"""
    return sorted(p.stem for p in BUNDLED_SYSTEMS_DIR.glob("*.json"))


def resolve_system_path(name_or_path: Union[str, Path]) -> Path:
    """
    Resolve a bundled system name or a file path.

    Raises:
        ConfigurationError: If neither a file nor a bundled system matches
    """
    path = Path(name_or_path)
    if path.is_file():
        return path
    bundled = BUNDLED_SYSTEMS_DIR / f"{name_or_path}.json"
    if bundled.is_file():
        return bundled
    raise ConfigurationError(
        f"System '{name_or_path}' is neither a file nor a bundled system "
        f"({', '.join(bundled_systems())})"
    )


def _parse_tensor(value: Any, field: str) -> np.ndarray:
    if isinstance(value, bool):
        raise SystemFileError("Tensor must be numeric", field=field)
    if isinstance(value, (int, float)):
        if not math.isfinite(value):
            raise SystemFileError("Isotropic coupling is not finite", field=field)
        return float(value) * np.eye(3)

    if not isinstance(value, list) or len(value) != 3:
        raise SystemFileError("Tensor must be a number or a list of 3 rows", field=field)

    rows = []
    for r, row in enumerate(value):
        if not isinstance(row, list) or len(row) != 3:
            length = len(row) if isinstance(row, list) else "non-list"
            raise SystemFileError(f"Tensor row {r} must have 3 entries, got {length}", field=field)
        for entry in row:
            if isinstance(entry, bool) or not isinstance(entry, (int, float)):
                raise SystemFileError(f"Tensor row {r} has a non-numeric entry {entry!r}", field=field)
            if not math.isfinite(entry):
                raise SystemFileError(f"Tensor row {r} has a non-finite entry", field=field)
        rows.append([float(x) for x in row])
    return np.array(rows)


def _parse_nucleus(data: Any, field: str) -> Nucleus:
    if not isinstance(data, dict):
        raise SystemFileError("Nucleus entry must be an object", field=field)
    if "tensor_mT" not in data:
        raise SystemFileError("Nucleus is missing 'tensor_mT'", field=field)

    multiplicity = data.get("multiplicity", 2)
    if isinstance(multiplicity, bool) or not isinstance(multiplicity, int) or multiplicity < 2:
        raise SystemFileError(f"Multiplicity must be an integer >= 2, got {multiplicity!r}",
                              field=f"{field}.multiplicity")

    tensor = _parse_tensor(data["tensor_mT"], f"{field}.tensor_mT")
    return Nucleus(multiplicity, tensor)


def parse_system(data: Any, label: str = "") -> SpinSystemSpec:
    """
    Validate a decoded system description.

    Args:
        data: Decoded JSON object
        label: Fallback label when the document has none

    Returns:
        Validated SpinSystemSpec
    """
    if not isinstance(data, dict):
        raise SystemFileError("System description must be a JSON object")

    radicals = data.get("radicals")
    if not isinstance(radicals, list) or len(radicals) != 2:
        raise SystemFileError("Expected exactly two radicals (donor and acceptor)", field="radicals")

    nuclei = {}
    for i, radical in enumerate(radicals):
        field = f"radicals[{i}]"
        if not isinstance(radical, dict):
            raise SystemFileError("Radical entry must be an object", field=field)
        role = radical.get("role", ROLES[i])
        if role not in ROLES:
            raise SystemFileError(f"Unknown role '{role}'", field=f"{field}.role")
        if role in nuclei:
            raise SystemFileError(f"Duplicate role '{role}'", field=f"{field}.role")
        entries = radical.get("nuclei", [])
        if not isinstance(entries, list):
            raise SystemFileError("'nuclei' must be a list", field=f"{field}.nuclei")
        nuclei[role] = [
            _parse_nucleus(entry, f"{field}.nuclei[{k}]") for k, entry in enumerate(entries)
        ]

    return SpinSystemSpec(
        donor_nuclei=nuclei["donor"],
        acceptor_nuclei=nuclei["acceptor"],
        label=str(data.get("label", label)),
    )


def parse_system_file(name_or_path: Union[str, Path]) -> SpinSystemSpec:
    """
    Load and validate a spin-system file.

    Args:
        name_or_path: Path to a JSON file, or the name of a bundled system

    Returns:
        Validated SpinSystemSpec

    Raises:
        SystemFileError: On JSON syntax or schema violations
    """
    path = resolve_system_path(name_or_path)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise SystemFileError(f"Invalid JSON in {path}: {e.msg}", line=e.lineno) from e

    try:
        system = parse_system(data, label=path.stem)
    except SystemFileError as e:
        raise SystemFileError(f"{path}: {e.reason}", field=e.field, line=e.line) from e

    logger.info(
        f"Loaded system '{system.label}': {system.nucleus_count} nuclei, "
        f"Hilbert dimension {system.dimension}"
    )
    return system
