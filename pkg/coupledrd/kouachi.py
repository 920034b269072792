"""Preset for the balance-law system with matrix [[α, β], [γ, α]].

The model is

    u_t − αΔu − βΔv = −σ f(u, v)
    v_t − γΔu − αΔv =  ρ f(u, v)

with homogeneous Neumann data. Since ρ·(−σf) + σ·(ρf) = 0 pointwise and the
Neumann Laplacian integrates to zero, Q = ∫(ρu + σv) is conserved.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from numpy.typing import ArrayLike

from coupledrd.analysis.conditions import KouachiConditions, check_h0, kouachi_conditions
from coupledrd.analysis.serialize import complex_to_dict, kouachi_conditions_to_dict
from coupledrd.analysis.spectrum import compute_spectrum
from coupledrd.matrix import DiffusionMatrix
from coupledrd.reaction import (
    ReactionSpec,
    accretivity_probe,
    build_reaction,
    sample_pairs,
)
from coupledrd.spectral import SpectralBasis, build_basis
from coupledrd.types import DomainConfig, GridConfig, KouachiParams

if TYPE_CHECKING:
    from coupledrd.solver import FrameOutput

logger = logging.getLogger(__name__)

# |f(0,0)| at or below this counts as f(0,0) = 0
ORIGIN_TOL = 1e-14


class ConditionFailedError(ValueError):
    """Raised in strict mode when 2α > β + γ (or f(0,0) = 0) fails."""
    pass


@dataclass(frozen=True)
class KouachiVerdicts:
    """Analyzer verdicts attached to a Kouachi build."""

    eigenvalues_closed_form: tuple[float, float]
    eigenvalues_numeric: tuple[complex, ...]
    eigenvalue_error: float
    conditions: KouachiConditions
    f_origin: float
    eq8: bool
    eq9_min: float
    monotone_fraction: float
    h0_pass: bool
    strict: bool
    notes: tuple[str, ...] = ()

    @property
    def proposition41(self) -> bool:
        """2α > β + γ together with f(0,0) = 0, the pair that makes the preset well posed."""
        return self.conditions.eq6 and self.eq8


@dataclass(frozen=True, eq=False)
class KouachiSetup:
    params: KouachiParams
    matrix: DiffusionMatrix
    reaction: ReactionSpec
    basis: SpectralBasis
    verdicts: KouachiVerdicts


def kouachi_matrix(alpha: float, beta: float, gamma: float) -> DiffusionMatrix:
    return DiffusionMatrix([[alpha, beta], [gamma, alpha]])


def kouachi_eigenvalues(alpha: float, beta: float, gamma: float) -> tuple[float, float]:
    """Closed form α ± √(βγ), larger first."""
    root = math.sqrt(beta) * math.sqrt(gamma)
    return (alpha + root, alpha - root)


def balance_integral(basis: SpectralBasis, values: ArrayLike, rho: float, sigma: float) -> float:
    """∫(ρu + σv) dx by the grid quadrature."""
    arr = np.asarray(values, dtype=float)
    return float(np.sum(basis.quad_weights * (rho * arr[0] + sigma * arr[1])))


def balance_functional(frame: FrameOutput, params: KouachiParams) -> float:
    """Conserved quantity Q of a Kouachi frame."""
    if frame.values.shape[0] != 2:
        raise ValueError(f"Balance functional needs d=2, got {frame.values.shape[0]}")
    return balance_integral(frame.basis, frame.values, params.rho, params.sigma)


def kouachi_reaction_params(params: KouachiParams) -> dict[str, float | int | str]:
    """Catalogue parameters of the Kouachi reaction for these constants."""
    out: dict[str, float | int | str] = {
        "sigma": params.sigma,
        "rho": params.rho,
        "f": params.f_name,
    }
    out.update(params.f_params)
    return out


def build_kouachi(
    params: KouachiParams,
    domain: DomainConfig,
    grid: GridConfig,
    *,
    strict: bool | None = None,
    reaction: ReactionSpec | None = None,
    seed: int = 0,
    tol_eig: float | None = None,
) -> KouachiSetup:
    """Assemble matrix, reaction and Neumann basis with analyzer verdicts.

    Args:
        params: Model constants.
        domain: Box lengths and dimension; the boundary kind is always Neumann.
        grid: Modes per axis.
        strict: Override params.strict.
        reaction: Custom Kouachi reaction replacing the catalogue rate.
        seed: Seed for the sampled sign check on params.probe_box.
        tol_eig: Tolerance for the H0 verdict.

    Returns:
        KouachiSetup instance.

    Raises:
        ConditionFailedError: In strict mode, if 2α > β + γ or f(0,0) = 0 fails.
    """
    strict = params.strict if strict is None else strict
    notes: list[str] = []

    matrix = kouachi_matrix(params.alpha, params.beta, params.gamma)
    closed = kouachi_eigenvalues(params.alpha, params.beta, params.gamma)
    spectrum = compute_spectrum(matrix)
    numeric = sorted((z.real for z in spectrum.eigenvalues), reverse=True)
    eig_error = max(abs(a - b) for a, b in zip(closed, numeric))
    conditions = kouachi_conditions(params.alpha, params.beta, params.gamma)
    h0 = check_h0(matrix, tol_eig, spectrum=spectrum)

    if not conditions.eq6:
        message = (
            f"2α > β + γ fails: 2·{params.alpha} <= {params.beta} + {params.gamma}"
        )
        if strict:
            raise ConditionFailedError(message)
        notes.append(f"lenient mode: {message}")
        logger.warning("Lenient Kouachi build: %s", message)
    if not h0.h0_pass:
        notes.append(f"α − √(βγ) = {closed[1]:.6g} < 0: H0 fails, simulation is refused")

    if reaction is None:
        reaction = build_reaction("kouachi", kouachi_reaction_params(params), d=2)
    elif reaction.kind != "kouachi":
        raise ValueError(f"Reaction '{reaction.name}' is not of Kouachi kind")

    rng = np.random.default_rng(seed)
    samples = sample_pairs(params.probe_box, params.probe_samples, 2, rng)
    probe = accretivity_probe(reaction, samples)
    eq8 = probe.f_origin <= ORIGIN_TOL
    if not eq8:
        message = f"f(0,0) = 0 fails: |f(0,0)| = {probe.f_origin:.3e}"
        if strict:
            raise ConditionFailedError(message)
        notes.append(f"lenient mode: {message}")
    assert probe.eq9_min is not None
    if probe.eq9_min < 0:
        notes.append(
            f"sampled −σu·f + ρv·f is negative on {list(params.probe_box)}: "
            f"min {probe.eq9_min:.6g}"
        )

    basis = build_basis(domain.space_dim, domain.lengths, "neumann", grid.modes_per_axis)
    verdicts = KouachiVerdicts(
        eigenvalues_closed_form=closed,
        eigenvalues_numeric=spectrum.eigenvalues,
        eigenvalue_error=eig_error,
        conditions=conditions,
        f_origin=probe.f_origin,
        eq8=eq8,
        eq9_min=probe.eq9_min,
        monotone_fraction=probe.monotone_fraction,
        h0_pass=h0.h0_pass,
        strict=strict,
        notes=tuple(notes),
    )
    logger.info(
        "Kouachi build: EV = {%.6g, %.6g}, eq6=%s, eq7=%s, well posed=%s",
        closed[0], closed[1], conditions.eq6, conditions.eq7, verdicts.proposition41,
    )
    return KouachiSetup(params=params, matrix=matrix, reaction=reaction, basis=basis,
                        verdicts=verdicts)


def verdicts_to_dict(verdicts: KouachiVerdicts) -> dict[str, object]:
    """Convert KouachiVerdicts to a JSON-serializable dict."""
    return {
        "eigenvalues": list(verdicts.eigenvalues_closed_form),
        "eigenvalues_numeric": [complex_to_dict(z) for z in verdicts.eigenvalues_numeric],
        "eigenvalue_error": verdicts.eigenvalue_error,
        **kouachi_conditions_to_dict(verdicts.conditions),
        "eq8": verdicts.eq8,
        "proposition41": verdicts.proposition41,
        "f_origin": verdicts.f_origin,
        "eq9_min": verdicts.eq9_min,
        "monotone_fraction": verdicts.monotone_fraction,
        "h0_pass": verdicts.h0_pass,
        "strict": verdicts.strict,
        "notes": list(verdicts.notes),
    }
