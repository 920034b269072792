"""Laplacian eigenbasis on intervals and rectangles.

Dirichlet boxes use sine modes collocated at the interior nodes
x_j = j·L/(N+1) (DST-I), Neumann boxes use cosine modes at the cell centres
x_j = (j+½)·L/N (DCT-II). With the uniform quadrature weight of each grid the
discrete eigenfunctions are exactly orthonormal, so the forward transform is
the orthonormal projection and the inverse is its transpose.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import scipy.fft
from numpy.typing import ArrayLike, NDArray

BoundaryCondition = Literal["dirichlet", "neumann"]
Direction = Literal["forward", "inverse"]

BOUNDARY_CONDITIONS = ("dirichlet", "neumann")


class UnsupportedDimError(ValueError):
    """Raised for space dimensions other than 1 and 2."""
    pass


class MissingRepresentationError(ValueError):
    """Raised when an operation needs a representation the field lacks."""
    pass


@dataclass(frozen=True, eq=False)
class SpectralBasis:
    """Eigenpairs of −Δ on a box with one boundary-condition kind.

    `mu` is stored in tensor layout (same shape as the grid and as the modal
    coefficient arrays); `sorted_mu()` gives the eigenvalues in
    nondecreasing order.
    """

    space_dim: int
    lengths: tuple[float, ...]
    bc: BoundaryCondition
    modes_per_axis: tuple[int, ...]
    nodes: tuple[NDArray[np.float64], ...] = field(init=False, repr=False)
    mu: NDArray[np.float64] = field(init=False, repr=False)
    quad_weights: NDArray[np.float64] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        nodes = []
        axis_mu = []
        spacing = []
        for length, n in zip(self.lengths, self.modes_per_axis):
            if self.bc == "dirichlet":
                h = length / (n + 1)
                nodes.append(h * np.arange(1, n + 1))
                k = np.arange(1, n + 1)
            else:
                h = length / n
                nodes.append(h * (np.arange(n) + 0.5))
                k = np.arange(n)
            axis_mu.append((k * np.pi / length) ** 2)
            spacing.append(h)

        mu = axis_mu[0]
        for extra in axis_mu[1:]:
            mu = np.add.outer(mu, extra)

        weights = np.full(self.shape, math.prod(spacing))
        for arr in (*nodes, mu, weights):
            arr.setflags(write=False)

        object.__setattr__(self, "nodes", tuple(nodes))
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "quad_weights", weights)

    @property
    def shape(self) -> tuple[int, ...]:
        """Grid shape, equal to the modal shape."""
        return tuple(self.modes_per_axis)

    @property
    def cell_volume(self) -> float:
        """Uniform quadrature weight of one grid node."""
        return float(self.quad_weights.flat[0])

    @property
    def volume(self) -> float:
        """|Ω|."""
        return math.prod(self.lengths)

    @property
    def _axes(self) -> tuple[int, ...]:
        return tuple(range(-self.space_dim, 0))

    def sorted_mu(self) -> NDArray[np.float64]:
        return np.sort(self.mu, axis=None)

    def mesh(self) -> tuple[NDArray[np.float64], ...]:
        """Node coordinates broadcast to the grid shape."""
        return tuple(np.meshgrid(*self.nodes, indexing="ij"))

    def inner(self, a: ArrayLike, b: ArrayLike) -> float:
        """Discrete L² inner product, summed over components if present."""
        return float(np.sum(self.cell_volume * np.asarray(a) * np.asarray(b)))

    def norm(self, values: ArrayLike) -> float:
        """Discrete L² norm of grid values."""
        return math.sqrt(max(self.inner(values, values), 0.0))

    def forward(self, values: ArrayLike) -> NDArray[np.float64]:
        """Grid values → orthonormal modal coefficients (last space_dim axes)."""
        arr = np.asarray(values, dtype=float)
        scale = math.sqrt(self.cell_volume)
        if self.bc == "dirichlet":
            return scipy.fft.dstn(arr, type=1, axes=self._axes, norm="ortho") * scale
        return scipy.fft.dctn(arr, type=2, axes=self._axes, norm="ortho") * scale

    def inverse(self, modal: ArrayLike) -> NDArray[np.float64]:
        """Orthonormal modal coefficients → grid values."""
        arr = np.asarray(modal, dtype=float)
        scale = math.sqrt(self.cell_volume)
        if self.bc == "dirichlet":
            return scipy.fft.idstn(arr, type=1, axes=self._axes, norm="ortho") / scale
        return scipy.fft.idctn(arr, type=2, axes=self._axes, norm="ortho") / scale

    def mode_values(self, index: Sequence[int]) -> NDArray[np.float64]:
        """Grid values of the orthonormal eigenfunction at a tensor index."""
        modal = np.zeros(self.shape)
        modal[tuple(index)] = 1.0
        return self.inverse(modal)


def _as_tuple(value: float | Sequence[float], space_dim: int, name: str) -> tuple[float, ...]:
    if isinstance(value, (int, float)):
        return (float(value),) * space_dim
    items = tuple(value)
    if len(items) != space_dim:
        raise ValueError(f"{name} needs {space_dim} entries, got {len(items)}")
    return items


def build_basis(
    space_dim: int,
    lengths: float | Sequence[float],
    bc: BoundaryCondition,
    modes_per_axis: int | Sequence[int],
) -> SpectralBasis:
    """Build the Laplacian eigenbasis on (0,L₁)[×(0,L₂)].

    Args:
        space_dim: 1 or 2.
        lengths: Side length(s) of the box.
        bc: "dirichlet" (sine modes k ≥ 1) or "neumann" (cosine modes k ≥ 0).
        modes_per_axis: Number of modes (= grid nodes) per axis.

    Returns:
        SpectralBasis instance.

    Raises:
        UnsupportedDimError: If space_dim is not 1 or 2.
        ValueError: If lengths, modes or bc are invalid.
    """
    if space_dim not in (1, 2):
        raise UnsupportedDimError(f"Only space_dim 1 or 2 is supported, got {space_dim}")
    if bc not in BOUNDARY_CONDITIONS:
        raise ValueError(f"Unknown boundary condition: {bc}")

    lens = tuple(float(x) for x in _as_tuple(lengths, space_dim, "lengths"))
    modes = tuple(int(n) for n in _as_tuple(modes_per_axis, space_dim, "modes_per_axis"))
    if any(not math.isfinite(x) or x <= 0 for x in lens):
        raise ValueError(f"lengths must be positive, got {lens}")
    if any(n < 1 for n in modes):
        raise ValueError(f"modes_per_axis must be >= 1, got {modes}")

    return SpectralBasis(space_dim=space_dim, lengths=lens, bc=bc, modes_per_axis=modes)


def _frozen(arr: ArrayLike | None) -> NDArray[np.float64] | None:
    if arr is None:
        return None
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class FieldState:
    """A d-component field on a basis, as grid values and/or modal coefficients.

    Arrays have shape (d, *basis.shape).
    """

    basis: SpectralBasis
    values: NDArray[np.float64] | None = None
    modal: NDArray[np.float64] | None = None

    def __post_init__(self) -> None:
        if self.values is None and self.modal is None:
            raise MissingRepresentationError("FieldState needs grid values or modal coefficients")
        d = None
        for name in ("values", "modal"):
            arr = _frozen(getattr(self, name))
            if arr is None:
                continue
            if arr.ndim == self.basis.space_dim:
                arr = _frozen(arr[np.newaxis])
                assert arr is not None
            if arr.shape[1:] != self.basis.shape:
                raise ValueError(
                    f"{name} has grid shape {arr.shape[1:]}, basis expects {self.basis.shape}"
                )
            if d is not None and arr.shape[0] != d:
                raise ValueError("values and modal disagree on the number of components")
            d = arr.shape[0]
            object.__setattr__(self, name, arr)

    @property
    def d(self) -> int:
        arr = self.values if self.values is not None else self.modal
        assert arr is not None
        return int(arr.shape[0])

    @classmethod
    def zeros(cls, basis: SpectralBasis, d: int) -> "FieldState":
        zero = np.zeros((d, *basis.shape))
        return cls(basis, values=zero, modal=zero)

    def ensure_modal(self) -> "FieldState":
        return self if self.modal is not None else transform(self, "forward")

    def ensure_values(self) -> "FieldState":
        return self if self.values is not None else transform(self, "inverse")

    def grid(self) -> NDArray[np.float64]:
        """Grid values, computing them if only modal data is present."""
        values = self.ensure_values().values
        assert values is not None
        return values

    def coefficients(self) -> NDArray[np.float64]:
        """Modal coefficients, computing them if only grid data is present."""
        modal = self.ensure_modal().modal
        assert modal is not None
        return modal

    def norm(self) -> float:
        """Discrete L² norm over all components."""
        if self.modal is not None:
            return float(np.linalg.norm(self.modal))
        return self.basis.norm(self.values)


def transform(state: FieldState, direction: Direction) -> FieldState:
    """Fill the missing representation of a field.

    Args:
        state: The field.
        direction: "forward" (grid → modal) or "inverse" (modal → grid).

    Returns:
        FieldState carrying both representations.

    Raises:
        MissingRepresentationError: If the source representation is absent.
    """
    if direction == "forward":
        if state.values is None:
            raise MissingRepresentationError("Forward transform needs grid values")
        return FieldState(state.basis, values=state.values, modal=state.basis.forward(state.values))
    if direction == "inverse":
        if state.modal is None:
            raise MissingRepresentationError("Inverse transform needs modal coefficients")
        return FieldState(state.basis, values=state.basis.inverse(state.modal), modal=state.modal)
    raise ValueError(f"Unknown direction: {direction}")


def laplacian_apply(state: FieldState) -> FieldState:
    """Apply Δ: multiply every modal coefficient by −μₖ.

    Raises:
        MissingRepresentationError: If the modal representation is absent.
    """
    if state.modal is None:
        raise MissingRepresentationError("laplacian_apply needs modal coefficients")
    modal = -state.basis.mu * state.modal
    return FieldState(state.basis, values=state.basis.inverse(modal), modal=modal)
