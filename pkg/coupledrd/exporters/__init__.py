"""Exporters for analysis reports and simulation output."""

from coupledrd.exporters.report import ReportExporter, ReportValidationError, dumps_json
from coupledrd.exporters.frames import (
    FrameExporter,
    diagnostics_csv,
    format_float,
    grid_csv,
    stationary_record,
    write_json,
)

__all__ = [
    "ReportExporter",
    "ReportValidationError",
    "dumps_json",
    "FrameExporter",
    "diagnostics_csv",
    "format_float",
    "grid_csv",
    "stationary_record",
    "write_json",
]
