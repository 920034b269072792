"""Diffusion matrix model for coupled reaction-diffusion systems."""

from __future__ import annotations

from collections.abc import Sequence
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray


class InvalidMatrixError(ValueError):
    """Raised when matrix entries do not describe a finite square matrix."""
    pass


class DiffusionMatrix:
    """The d×d real diffusion matrix M of u_t = MΔu + F(u).

    Wraps a read-only NumPy array with the structural views the analyzer
    and the solvers need: block splitting for even d, the Hermitian part of
    the modal symbol, and the normality defect.
    """

    def __init__(self, entries: ArrayLike, d: int | None = None) -> None:
        """Build the matrix from nested rows or a row-major flat list.

        Args:
            entries: Either a d×d nested sequence or d² row-major numbers.
            d: Dimension, required when entries is flat.

        Raises:
            InvalidMatrixError: If the entries are not a finite square matrix.
        """
        arr = np.array(entries, dtype=float)

        if arr.ndim == 1:
            if d is None:
                d = int(round(np.sqrt(arr.size)))
            if d < 1 or arr.size != d * d:
                raise InvalidMatrixError(
                    f"Expected {d * d if d else 'd²'} entries for d={d}, got {arr.size}"
                )
            arr = arr.reshape(d, d)
        elif arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise InvalidMatrixError(f"Matrix must be square, got shape {arr.shape}")
        elif d is not None and arr.shape[0] != d:
            raise InvalidMatrixError(f"Matrix is {arr.shape[0]}x{arr.shape[0]}, expected d={d}")

        if not np.all(np.isfinite(arr)):
            raise InvalidMatrixError("Matrix entries must be finite")

        arr.setflags(write=False)
        self._entries = arr

    @classmethod
    def from_row_major(cls, d: int, entries: Sequence[float]) -> "DiffusionMatrix":
        """Build from the configuration layout (d and d² row-major entries)."""
        return cls(list(entries), d=d)

    @property
    def entries(self) -> NDArray[np.float64]:
        """Read-only d×d array."""
        return self._entries

    @property
    def d(self) -> int:
        return int(self._entries.shape[0])

    def norm(self) -> float:
        """Spectral norm ‖M‖₂."""
        return float(np.linalg.norm(self._entries, ord=2))

    def is_zero(self) -> bool:
        """Exact all-zeros test."""
        return not np.any(self._entries)

    def hermitian_part(self) -> NDArray[np.float64]:
        """(M + Mᵀ)/2, the part governing accretivity of the modal symbol."""
        return 0.5 * (self._entries + self._entries.T)

    def normality_defect(self) -> float:
        """Frobenius norm of MMᵀ − MᵀM."""
        m = self._entries
        return float(np.linalg.norm(m @ m.T - m.T @ m, ord="fro"))

    def blocks(self) -> tuple[NDArray[np.float64], ...]:
        """Split M into the n×n blocks (M₁, M₂, M₃, M₄) for d = 2n.

        Raises:
            ValueError: If d is odd.
        """
        if self.d % 2:
            raise ValueError(f"Block view needs even d, got d={self.d}")
        n = self.d // 2
        m = self._entries
        return m[:n, :n], m[:n, n:], m[n:, :n], m[n:, n:]

    def similar(self, transform: ArrayLike) -> "DiffusionMatrix":
        """Return ΠMΠ⁻¹ for a nonsingular Π."""
        pi = np.asarray(transform, dtype=float)
        return DiffusionMatrix(pi @ self._entries @ np.linalg.inv(pi))

    def to_rows(self) -> list[list[float]]:
        return [[float(x) for x in row] for row in self._entries]

    def to_row_major(self) -> list[float]:
        return [float(x) for x in self._entries.ravel()]

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, DiffusionMatrix):
            return NotImplemented
        return bool(np.array_equal(self._entries, other._entries))

    def __hash__(self) -> int:
        return hash(self._entries.tobytes())

    def __repr__(self) -> str:
        return f"DiffusionMatrix({self.to_rows()!r})"
