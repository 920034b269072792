"""Serialization utilities for analysis results."""

from __future__ import annotations

from typing import Any

from coupledrd.analysis.conditions import (
    KouachiConditions,
    NormalityReport,
    WellPosednessReport,
)
from coupledrd.analysis.spectrum import SpectrumReport


def complex_to_dict(z: complex) -> dict[str, float]:
    """Complex number as {"re": ..., "im": ...}."""
    return {"re": float(z.real), "im": float(z.imag)}


def spectrum_to_dict(spectrum: SpectrumReport) -> dict[str, Any]:
    """Convert SpectrumReport to a JSON-serializable dict."""
    return {
        "eigenvalues": [complex_to_dict(z) for z in spectrum.eigenvalues],
        "jordan_blocks": [
            {
                "eigenvalue": complex_to_dict(c.eigenvalue),
                "multiplicity": c.multiplicity,
                "block_sizes": list(c.block_sizes),
            }
            for c in spectrum.jordan_blocks
        ],
        "normality_defect": spectrum.normality_defect,
        "min_real_part": spectrum.min_real_part,
        "diagnostic": spectrum.diagnostic,
        "tol_cluster": spectrum.tol_cluster,
    }


def wellposedness_to_dict(report: WellPosednessReport) -> dict[str, Any]:
    """Convert WellPosednessReport to a JSON-serializable dict."""
    theorem21 = None
    if report.theorem21 is not None:
        record = report.theorem21
        theorem21 = {
            "blocks_commute": record.blocks_commute,
            "m1_invertible": record.m1_invertible,
            "m4_invertible": record.m4_invertible,
            "d_even": record.d_even,
        }
    return {
        "h0_pass": report.h0_pass,
        "is_zero_matrix": report.is_zero_matrix,
        "symbol_accretive": report.symbol_accretive,
        "min_real_part": report.min_real_part,
        "normal": report.normal,
        "theorem21": theorem21,
        "notes": list(report.notes),
    }


def kouachi_conditions_to_dict(conditions: KouachiConditions) -> dict[str, bool]:
    return {"eq6": conditions.eq6, "eq7": conditions.eq7}


def normality_to_dict(report: NormalityReport) -> dict[str, Any]:
    return {
        "normal": report.normal,
        "commutator_norm": report.commutator_norm,
        "tolerance": report.tolerance,
    }
