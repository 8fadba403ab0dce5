"""CSV export of series and sweep records, with a JSON run manifest alongside"""

import csv
import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from src import __version__


logger = logging.getLogger(__name__)

MANIFEST_SUFFIX = ".manifest.json"


def format_cell(value: Any) -> str:
    """
    Format one cell.

    Floats use the shortest representation that parses back to the same
    double, with "." as decimal separator.
    """
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return ""
    return str(value)


def parse_cell(text: str) -> Any:
    """Inverse of format_cell for numbers and booleans; other text is returned as is"""
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def manifest_path(csv_path: Union[str, Path]) -> Path:
    path = Path(csv_path)
    return path.with_name(path.name + MANIFEST_SUFFIX)


class CsvExporter:
    """Collects rows and writes them as a UTF-8 CSV file"""

    def __init__(self, output_path: Union[str, Path], columns: Optional[Sequence[str]] = None):
        """
        Initialize CSV exporter.

        Args:
            output_path: Path to output CSV file
            columns: Column order; defaults to the keys of the first row
        """
        self.output_path = Path(output_path)
        self.columns: Optional[List[str]] = list(columns) if columns else None
        self.rows: List[Dict[str, Any]] = []
        self._is_finalized = False

    def add_row(self, row: Dict[str, Any]) -> None:
        """
        Add one row.

        Raises:
            RuntimeError: If the file was already written
            ValueError: If the row's keys differ from the columns
        """
        if self._is_finalized:
            raise RuntimeError("Cannot add rows after finalization")
        if self.columns is None:
            self.columns = list(row)
        elif list(row) != self.columns:
            raise ValueError(f"Row columns {list(row)} differ from header {self.columns}")
        self.rows.append(row)

    def finalize(self) -> Path:
        """
        Write the header and all rows.

        Returns:
            Path of the written file

        Raises:
            OSError: If the file cannot be written, with the path in the message
        """
        if self._is_finalized:
            return self.output_path
        if self.columns is None:
            raise ValueError(f"No columns known for {self.output_path}")

        try:
            self.output_path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.output_path, 'w', encoding='utf-8', newline='') as f:
                writer = csv.writer(f, lineterminator="\n")
                writer.writerow(self.columns)
                for row in self.rows:
                    writer.writerow([format_cell(row[name]) for name in self.columns])
        except OSError as e:
            raise OSError(f"Failed to write CSV file {self.output_path}: {e}") from e

        self._is_finalized = True
        logger.info(f"Wrote {len(self.rows)} rows to {self.output_path}")
        return self.output_path

    def is_finalized(self) -> bool:
        return self._is_finalized

    def get_row_count(self) -> int:
        return len(self.rows)


def write_manifest(
    csv_path: Union[str, Path],
    config: Dict[str, Any],
    command: str = "",
    extra: Optional[Dict[str, Any]] = None,
    deterministic: bool = True,
) -> Path:
    """
    Write the resolved configuration next to a CSV file.

    Keys are sorted; the creation timestamp is left out in deterministic mode
    so that re-runs produce identical bytes.
    """
    manifest: Dict[str, Any] = {
        "version": __version__,
        "command": command,
        "output": Path(csv_path).name,
        "config": config,
    }
    if extra:
        manifest.update(extra)
    if not deterministic:
        manifest["created"] = datetime.now(timezone.utc).isoformat()

    path = manifest_path(csv_path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(manifest, f, indent=2, sort_keys=True, ensure_ascii=False, default=_json_default)
            f.write("\n")
    except OSError as e:
        raise OSError(f"Failed to write manifest {path}: {e}") from e
    return path


def _json_default(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def emit_csv(
    rows: Iterable[Dict[str, Any]],
    path: Union[str, Path],
    columns: Optional[Sequence[str]] = None,
    manifest: Optional[Dict[str, Any]] = None,
    command: str = "",
    deterministic: bool = True,
) -> Path:
    """
    Write rows as CSV and a manifest alongside.

    Args:
        rows: Row dictionaries sharing one key order
        path: Output CSV path
        columns: Header; required when rows is empty
        manifest: Resolved configuration to record; an empty one is written if None
        command: Name of the producing command
        deterministic: Omit timestamps from the manifest

    Returns:
        Path of the CSV file
    """
    exporter = CsvExporter(path, columns)
    for row in rows:
        exporter.add_row(row)
    written = exporter.finalize()
    write_manifest(written, manifest or {}, command=command, deterministic=deterministic,
                   extra={"columns": exporter.columns, "rows": exporter.get_row_count()})
    return written


def read_csv(path: Union[str, Path]) -> Tuple[List[str], List[Dict[str, Any]]]:
    """
    Parse a file written by emit_csv.

    Returns:
        (columns, rows) with numeric and boolean cells converted back

    Raises:
        OSError: If the file cannot be read, with the path in the message
    """
    path = Path(path)
    try:
        with open(path, 'r', encoding='utf-8', newline='') as f:
            reader = csv.reader(f)
            columns = next(reader, [])
            rows = [dict(zip(columns, (parse_cell(cell) for cell in line))) for line in reader]
    except OSError as e:
        raise OSError(f"Failed to read CSV file {path}: {e}") from e
    return columns, rows
