"""Exact per-mode diffusion propagators exp(−tμₖM).

The evolution solved is u_t = MΔu. Mode k with −Δφₖ = μₖφₖ evolves by the
d×d system ċ = −μₖMc, so one step of length t multiplies the coefficient
vector of mode k by Pₖ(t) = exp(−tμₖM).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

from coupledrd.analysis.conditions import check_h0
from coupledrd.matrix import DiffusionMatrix
from coupledrd.spectral import FieldState, SpectralBasis

logger = logging.getLogger(__name__)

ExpmMethod = Literal["expm", "eig"]

# Condition-number ceiling for the eigendecomposition fast path
EIG_CONDITION_LIMIT = 1e8


class H0ViolationError(ValueError):
    """Raised when diffusion is requested for a matrix failing H0."""
    pass


def _eig_factors(
    matrix: DiffusionMatrix,
) -> tuple[NDArray[np.complex128], NDArray[np.complex128], NDArray[np.complex128]] | None:
    """Eigendecomposition usable for the fast path, or None if ill-conditioned."""
    vals, vecs = scipy.linalg.eig(matrix.entries)
    if np.linalg.cond(vecs) > EIG_CONDITION_LIMIT:
        return None
    gaps = np.abs(vals[:, None] - vals[None, :])
    np.fill_diagonal(gaps, np.inf)
    if len(vals) > 1 and gaps.min() <= 1e-8 * max(1.0, matrix.norm()):
        return None
    return vals, vecs, np.linalg.inv(vecs)


def _propagators(
    matrix: DiffusionMatrix,
    mu: NDArray[np.float64],
    t: float,
    method: ExpmMethod,
) -> NDArray[np.float64]:
    """Stack of exp(−tμM) with shape (*mu.shape, d, d)."""
    mu = np.asarray(mu, dtype=float)

    if method == "eig":
        factors = _eig_factors(matrix)
        if factors is not None:
            vals, vecs, inv = factors
            diag = np.exp(-t * mu[..., None] * vals)
            full = np.einsum("ij,...j,jk->...ik", vecs, diag, inv)
            return np.ascontiguousarray(full.real)
        logger.debug("Eigenvector basis ill-conditioned; falling back to scaling-and-squaring")

    return np.asarray(scipy.linalg.expm(-t * mu[..., None, None] * matrix.entries))


def modal_propagator(
    matrix: DiffusionMatrix,
    mu: float,
    t: float,
    method: ExpmMethod = "expm",
) -> NDArray[np.float64]:
    """Return exp(−t·μ·M).

    Args:
        matrix: Diffusion matrix.
        mu: Laplacian eigenvalue, μ ≥ 0.
        t: Time increment, t ≥ 0.
        method: "expm" (scaling-and-squaring Padé, default) or "eig"
            (eigendecomposition, used only when the eigenvector matrix is
            well conditioned and the eigenvalues are separated).

    Returns:
        d×d real matrix.
    """
    if mu < 0 or t < 0:
        raise ValueError(f"mu and t must be nonnegative, got mu={mu}, t={t}")
    return _propagators(matrix, np.array(mu), t, method)


@dataclass(frozen=True, eq=False)
class ModalPropagator:
    """Per-mode propagators Pₖ(t) = exp(−tμₖM) for one basis."""

    matrix: DiffusionMatrix
    t: float
    mu: NDArray[np.float64]
    matrices: NDArray[np.float64]

    @classmethod
    def build(
        cls,
        matrix: DiffusionMatrix,
        basis: SpectralBasis,
        t: float,
        method: ExpmMethod = "expm",
    ) -> "ModalPropagator":
        if t < 0:
            raise ValueError(f"t must be nonnegative, got {t}")
        matrices = _propagators(matrix, basis.mu, t, method)
        matrices.setflags(write=False)
        return cls(matrix=matrix, t=t, mu=basis.mu, matrices=matrices)

    def apply(self, modal: ArrayLike) -> NDArray[np.float64]:
        """Multiply each mode's d-vector of coefficients by its propagator."""
        coeffs = np.moveaxis(np.asarray(modal, dtype=float), 0, -1)
        out = np.einsum("...ij,...j->...i", self.matrices, coeffs)
        return np.moveaxis(out, -1, 0)

    def spectral_radius(self) -> float:
        """Largest spectral radius over all modes."""
        eig = np.linalg.eigvals(self.matrices)
        return float(np.max(np.abs(eig)))

    def max_norm(self) -> float:
        """Largest operator 2-norm over all modes (transient growth)."""
        return float(np.max(np.linalg.norm(self.matrices, ord=2, axis=(-2, -1))))


@dataclass(frozen=True)
class PropagatorDiagnostics:
    t: float
    spectral_radius: float
    max_norm: float


def propagator_diagnostics(
    matrix: DiffusionMatrix,
    basis: SpectralBasis,
    t: float,
) -> PropagatorDiagnostics:
    """Spectral radius and transient growth of the propagators over t."""
    prop = ModalPropagator.build(matrix, basis, t)
    return PropagatorDiagnostics(
        t=t, spectral_radius=prop.spectral_radius(), max_norm=prop.max_norm()
    )


def require_h0(matrix: DiffusionMatrix, tol_eig: float | None = None) -> None:
    """Refuse matrices failing H0.

    Raises:
        H0ViolationError: If some eigenvalue has negative real part.
    """
    report = check_h0(matrix, tol_eig, allow_zero=True)
    if not report.h0_pass:
        raise H0ViolationError(
            f"H0 fails: min Re λ(M) = {report.min_real_part:.6g} < 0; "
            "diffusion would amplify modes without bound"
        )


def diffuse(
    state: FieldState,
    matrix: DiffusionMatrix,
    t: float,
    *,
    allow_h0_violation: bool = False,
    propagator: ModalPropagator | None = None,
    tol_eig: float | None = None,
) -> FieldState:
    """Advance u_t = MΔu exactly by time t.

    Args:
        state: Field (grid values are transformed if modal data is absent).
        matrix: Diffusion matrix with d matching the field.
        t: Time increment, t ≥ 0.
        allow_h0_violation: Skip the H0 refusal (experimentation only).
        propagator: Precomputed propagator for this basis, matrix and t.
        tol_eig: Tolerance for the H0 check; the default scales with ‖M‖.

    Returns:
        FieldState with both representations.

    Raises:
        H0ViolationError: If H0 fails and no override is given.
        ValueError: If the propagator was built for another matrix, basis or time.
    """
    if matrix.d != state.d:
        raise ValueError(f"Matrix has d={matrix.d}, field has {state.d} components")
    if allow_h0_violation:
        logger.warning("Diffusing with H0 check overridden")
    else:
        require_h0(matrix, tol_eig)

    if propagator is None:
        propagator = ModalPropagator.build(matrix, state.basis, t)
    elif (
        propagator.t != t
        or propagator.matrix != matrix
        or not np.array_equal(propagator.mu, state.basis.mu)
    ):
        raise ValueError(
            f"Propagator does not match this call (built for t={propagator.t}, got t={t})"
        )
    modal = propagator.apply(state.coefficients())
    return FieldState(state.basis, values=state.basis.inverse(modal), modal=modal)
