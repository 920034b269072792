"""Analysis report exporter (report.json)."""

from __future__ import annotations

import json
from typing import Any

import jsonschema

from coupledrd._version import __version__
from coupledrd.analysis import (
    NormalityReport,
    SpectrumReport,
    WellPosednessReport,
    normality_to_dict,
    spectrum_to_dict,
    wellposedness_to_dict,
)
from coupledrd.matrix import DiffusionMatrix
from coupledrd.reaction import ProbeResult, ReactionSpec
from coupledrd.schema import REPORT_SCHEMA, load_schema
from coupledrd.semigroup import PropagatorDiagnostics


class ReportValidationError(ValueError):
    """Raised when a report does not match the bundled report schema."""
    pass


def dumps_json(data: Any) -> str:
    """UTF-8 friendly JSON with sorted keys and a trailing newline."""
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


class ReportExporter:
    """Assemble and validate analysis reports.

    Every report is checked against the bundled schema before it is
    rendered, so a written report.json always validates.
    """

    def __init__(self, schema: dict[str, Any] | None = None) -> None:
        """Initialize exporter.

        Args:
            schema: Report schema. Uses the bundled schema if None.
        """
        self._validator = jsonschema.Draft202012Validator(schema or load_schema(REPORT_SCHEMA))

    def build(
        self,
        matrix: DiffusionMatrix,
        spectrum: SpectrumReport,
        wellposedness: WellPosednessReport,
        normality: NormalityReport,
        *,
        propagators: PropagatorDiagnostics | None = None,
        reaction: ReactionSpec | None = None,
        probe: ProbeResult | None = None,
        kouachi: dict[str, Any] | None = None,
    ) -> dict[str, Any]:
        """Collect analyzer results into one report dict."""
        report: dict[str, Any] = {
            "version": __version__,
            "matrix": {"d": matrix.d, "entries": matrix.to_rows()},
            "spectrum": spectrum_to_dict(spectrum),
            "wellposedness": wellposedness_to_dict(wellposedness),
            "normality": normality_to_dict(normality),
        }
        if propagators is not None:
            report["propagators"] = {
                "t": propagators.t,
                "spectral_radius": propagators.spectral_radius,
                "max_norm": propagators.max_norm,
            }
        if reaction is not None and probe is not None:
            report["reaction_probe"] = {
                "name": reaction.name,
                "orientation": reaction.orientation,
                "monotone_fraction": probe.monotone_fraction,
                "f_origin": probe.f_origin,
                "eq9_min": probe.eq9_min,
            }
        if kouachi is not None:
            report["kouachi"] = kouachi
        return report

    def validate(self, report: dict[str, Any]) -> None:
        """Raises ReportValidationError listing every schema violation."""
        errors = sorted(self._validator.iter_errors(report), key=lambda e: list(e.absolute_path))
        if errors:
            listed = "; ".join(
                f"{'.'.join(str(p) for p in e.absolute_path) or 'root'}: {e.message}"
                for e in errors
            )
            raise ReportValidationError(f"Report does not match schema: {listed}")

    def export(self, report: dict[str, Any]) -> str:
        """Validate and render a report as JSON text."""
        self.validate(report)
        return dumps_json(report)
