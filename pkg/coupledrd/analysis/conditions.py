"""Well-posedness verdicts on the diffusion matrix."""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Literal

import numpy as np
import scipy.linalg

from coupledrd.analysis.spectrum import SpectrumReport, compute_spectrum
from coupledrd.matrix import DiffusionMatrix

logger = logging.getLogger(__name__)

BoundaryKind = Literal["dirichlet", "neumann"]


class ZeroMatrixError(ValueError):
    """Raised when M is the zero matrix, which the H0 theory excludes."""
    pass


class NegativeProductError(ValueError):
    """Raised when βγ < 0 (or a coupling constant is negative)."""
    pass


@dataclass(frozen=True)
class Theorem21Record:
    """Finite-dimensional block checks for d = 2n."""

    blocks_commute: bool
    m1_invertible: bool
    m4_invertible: bool
    d_even: bool


@dataclass(frozen=True)
class WellPosednessReport:
    """Verdicts for H0, zero matrix, symbol accretivity and block conditions."""

    h0_pass: bool
    is_zero_matrix: bool
    symbol_accretive: bool
    min_real_part: float
    normal: bool
    theorem21: Theorem21Record | None = None
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class KouachiConditions:
    """Flags for 2α > β + γ (eq6) and α > √(βγ) (eq7)."""

    eq6: bool
    eq7: bool


def default_tol_eig(matrix: DiffusionMatrix) -> float:
    """1e-10·(1 + ‖M‖)."""
    return 1e-10 * (1.0 + matrix.norm())


def check_h0(
    matrix: DiffusionMatrix,
    tol_eig: float | None = None,
    *,
    allow_zero: bool = False,
    spectrum: SpectrumReport | None = None,
) -> WellPosednessReport:
    """Check that every eigenvalue of M lies in the closed right half-plane.

    Also checks positive semidefiniteness of the Hermitian part of M, which
    decides accretivity of the modal symbol μₖM.

    Args:
        matrix: The diffusion matrix.
        tol_eig: Eigenvalue tolerance; defaults to 1e-10·(1+‖M‖).
        allow_zero: Return a report for M = 0 instead of raising.
        spectrum: Precomputed spectrum to reuse.

    Returns:
        WellPosednessReport without the block-condition record.

    Raises:
        ZeroMatrixError: If M = 0 and allow_zero is False.
    """
    tol = default_tol_eig(matrix) if tol_eig is None else tol_eig
    notes: list[str] = []

    is_zero = matrix.is_zero()
    if is_zero:
        if not allow_zero:
            raise ZeroMatrixError("M is the zero matrix; the well-posedness result excludes it")
        notes.append("M is the zero matrix: diffusion is absent")

    spec = spectrum or compute_spectrum(matrix)
    h0_pass = spec.min_real_part >= -tol

    boundary = [z for z in spec.eigenvalues if abs(z.real) <= tol]
    if h0_pass and boundary:
        listed = ", ".join(f"{z.real:+.3e}{z.imag:+.3e}j" for z in boundary)
        notes.append(
            f"eigenvalues within {tol:.1e} of the imaginary axis pass H0 (closed set S): {listed}"
        )
        logger.warning("Eigenvalues on the imaginary axis accepted by H0: %s", listed)

    hermitian_min = float(scipy.linalg.eigvalsh(matrix.hermitian_part())[0])
    symbol_accretive = hermitian_min >= -tol
    if h0_pass and not symbol_accretive:
        notes.append(
            "H0 holds but (M+Mᵀ)/2 is indefinite: modal propagators can grow transiently in norm"
        )

    return WellPosednessReport(
        h0_pass=h0_pass,
        is_zero_matrix=is_zero,
        symbol_accretive=symbol_accretive,
        min_real_part=spec.min_real_part,
        normal=spec.normality_defect <= tol,
        notes=tuple(notes),
    )


def theorem21_conditions(
    matrix: DiffusionMatrix,
    tol_eig: float | None = None,
    *,
    bc: BoundaryKind = "dirichlet",
    allow_zero: bool = False,
) -> WellPosednessReport:
    """Evaluate the block conditions for the split M = [[M₁, M₂], [M₃, M₄]].

    Kernel conditions on A = −M₁Δ and E = −M₄Δ become invertibility of M₁
    and M₄ because the Dirichlet Laplacian is injective. Density and
    closedness hold for constant-coefficient blocks of one Laplacian.

    Args:
        matrix: The diffusion matrix.
        tol_eig: Tolerance for commutators and smallest singular values.
        bc: Boundary kind of the basis the verdict is meant for.
        allow_zero: Forwarded to check_h0.

    Returns:
        WellPosednessReport with `theorem21` populated for even d, or
        absent with a note for odd d.
    """
    tol = default_tol_eig(matrix) if tol_eig is None else tol_eig
    report = check_h0(matrix, tol, allow_zero=allow_zero)
    notes = list(report.notes)

    if matrix.d % 2:
        notes.append(f"OddDimension: d={matrix.d} is odd, block conditions are not defined")
        return dataclasses.replace(report, notes=tuple(notes))

    blocks = matrix.blocks()
    blocks_commute = all(
        np.linalg.norm(a @ b - b @ a, ord="fro") <= tol for a, b in combinations(blocks, 2)
    )
    m1_invertible = float(scipy.linalg.svdvals(blocks[0])[-1]) > tol
    m4_invertible = float(scipy.linalg.svdvals(blocks[3])[-1]) > tol

    notes.append(
        "kernel conditions N(A) = N(E) = {0} checked as invertibility of M₁, M₄ "
        "(the Dirichlet Laplacian is injective)"
    )
    notes.append("density and closedness conditions hold for constant-coefficient blocks")
    if bc == "neumann":
        notes.append(
            "Neumann basis contains the zero mode μ₀ = 0: the kernel conditions do not "
            "carry over verbatim"
        )

    record = Theorem21Record(
        blocks_commute=bool(blocks_commute),
        m1_invertible=m1_invertible,
        m4_invertible=m4_invertible,
        d_even=True,
    )
    return dataclasses.replace(report, theorem21=record, notes=tuple(notes))


def kouachi_conditions(alpha: float, beta: float, gamma: float) -> KouachiConditions:
    """Evaluate 2α > β + γ and α > √(βγ).

    Both inequalities are decided exactly on the rational values of the
    float inputs. α > √(βγ) is tested as α > 0 and α² > βγ.

    Raises:
        NegativeProductError: If β or γ is negative.
        ValueError: If a constant is not finite.
    """
    if not all(math.isfinite(x) for x in (alpha, beta, gamma)):
        raise ValueError(f"Constants must be finite, got α={alpha}, β={beta}, γ={gamma}")
    if beta < 0 or gamma < 0:
        raise NegativeProductError(
            f"β and γ must be nonnegative so that √(βγ) is real, got β={beta}, γ={gamma}"
        )
    a, b, c = Fraction(alpha), Fraction(beta), Fraction(gamma)
    eq6 = 2 * a > b + c
    eq7 = a > 0 and a * a > b * c
    return KouachiConditions(eq6=eq6, eq7=eq7)


@dataclass(frozen=True)
class NormalityReport:
    """Normality of the modal symbol μₖM, decided by M·Mᵀ = Mᵀ·M."""

    normal: bool
    commutator_norm: float
    tolerance: float


def normality_report(matrix: DiffusionMatrix, tol_eig: float | None = None) -> NormalityReport:
    """Check whether the diffusion operator is normal.

    Every modal symbol μₖM is normal iff M commutes with its transpose, in
    which case the semigroup norm equals its spectral radius per mode.
    """
    tol = default_tol_eig(matrix) if tol_eig is None else tol_eig
    defect = matrix.normality_defect()
    return NormalityReport(normal=defect <= tol, commutator_norm=defect, tolerance=tol)
