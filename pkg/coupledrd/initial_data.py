"""Named catalogue of initial-data expressions."""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

from coupledrd.spectral import FieldState, SpectralBasis
from coupledrd.types import ComponentConfig, InitialDataConfig, InitialTerm


def evaluate_term(basis: SpectralBasis, term: InitialTerm) -> NDArray[np.float64]:
    """Evaluate one catalogue term on the basis grid.

    `sine`/`cosine` with mode (k₁[, k₂]) is the product of sin(kπx/L)
    (resp. cos) over axes; `gaussian` is amplitude·exp(−|x−c|²/(2w²));
    `constant` is value (or amplitude when value is absent).
    """
    coords = basis.mesh()

    if term.kind == "constant":
        level = term.value if term.value is not None else term.amplitude
        return np.full(basis.shape, float(level))

    if term.kind in ("sine", "cosine"):
        mode = term.mode or [1] * basis.space_dim
        wave = np.sin if term.kind == "sine" else np.cos
        out = np.full(basis.shape, term.amplitude)
        for x, k, length in zip(coords, mode, basis.lengths):
            out = out * wave(k * np.pi * x / length)
        return out

    center = term.center or [0.5 * length for length in basis.lengths]
    width = term.width or 0.1 * min(basis.lengths)
    r2 = sum((x - c) ** 2 for x, c in zip(coords, center))
    return term.amplitude * np.exp(-r2 / (2.0 * width**2))


def evaluate_component(basis: SpectralBasis, component: ComponentConfig) -> NDArray[np.float64]:
    """Sum of a component's terms, or its inline values reshaped to the grid."""
    if component.values is not None:
        return np.asarray(component.values, dtype=float).reshape(basis.shape)
    out = np.zeros(basis.shape)
    for term in component.terms:
        out = out + evaluate_term(basis, term)
    return out


def build_initial_state(basis: SpectralBasis, initial: InitialDataConfig) -> FieldState:
    """Build the d-component initial field with both representations."""
    values = np.stack([evaluate_component(basis, c) for c in initial.components])
    return FieldState(basis, values=values, modal=basis.forward(values))
