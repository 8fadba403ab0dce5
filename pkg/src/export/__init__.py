"""CSV and manifest export components"""

from .csv_exporter import (
    CsvExporter,
    emit_csv,
    format_cell,
    manifest_path,
    parse_cell,
    read_csv,
    write_manifest,
)

__all__ = [
    'CsvExporter',
    'emit_csv',
    'format_cell',
    'manifest_path',
    'parse_cell',
    'read_csv',
    'write_manifest',
]
