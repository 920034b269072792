"""Matrix-level analysis of the diffusion matrix M.

Example usage:
    from coupledrd.matrix import DiffusionMatrix
    from coupledrd.analysis import compute_spectrum, check_h0, kouachi_conditions

    m = DiffusionMatrix([[2.0, 1.0], [1.0, 2.0]])
    spectrum = compute_spectrum(m)          # eigenvalues {1, 3}
    report = check_h0(m)                    # h0_pass, symbol_accretive
    flags = kouachi_conditions(2.0, 1.0, 1.0)
"""

# Spectrum - eigenvalues and Jordan diagnostics
from .spectrum import (
    JordanCluster,
    SpectrumError,
    SpectrumReport,
    compute_spectrum,
    default_tol_cluster,
)

# Conditions - well-posedness verdicts
from .conditions import (
    KouachiConditions,
    NegativeProductError,
    NormalityReport,
    Theorem21Record,
    WellPosednessReport,
    ZeroMatrixError,
    check_h0,
    default_tol_eig,
    kouachi_conditions,
    normality_report,
    theorem21_conditions,
)

# Serialization
from .serialize import (
    complex_to_dict,
    kouachi_conditions_to_dict,
    normality_to_dict,
    spectrum_to_dict,
    wellposedness_to_dict,
)

__all__ = [
    # Spectrum
    "JordanCluster",
    "SpectrumError",
    "SpectrumReport",
    "compute_spectrum",
    "default_tol_cluster",
    # Conditions
    "KouachiConditions",
    "NegativeProductError",
    "NormalityReport",
    "Theorem21Record",
    "WellPosednessReport",
    "ZeroMatrixError",
    "check_h0",
    "default_tol_eig",
    "kouachi_conditions",
    "normality_report",
    "theorem21_conditions",
    # Serialization
    "complex_to_dict",
    "kouachi_conditions_to_dict",
    "normality_to_dict",
    "spectrum_to_dict",
    "wellposedness_to_dict",
]
