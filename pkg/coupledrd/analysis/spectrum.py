"""Spectrum and Jordan-structure diagnostics for diffusion matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from coupledrd.matrix import DiffusionMatrix


class SpectrumError(RuntimeError):
    """Raised when the eigen-iteration does not converge."""
    pass


@dataclass(frozen=True)
class JordanCluster:
    """One eigenvalue cluster and its estimated Jordan block sizes."""

    eigenvalue: complex
    multiplicity: int
    block_sizes: tuple[int, ...]


@dataclass(frozen=True)
class SpectrumReport:
    """Eigenvalues of M with structural diagnostics.

    `eigenvalues` lists all d values (with repetition) sorted by real part,
    then imaginary part. `jordan_blocks` is a numerical estimate only and is
    flagged through `diagnostic` whenever an eigenvalue cluster has more than
    one member.
    """

    eigenvalues: tuple[complex, ...]
    jordan_blocks: tuple[JordanCluster, ...]
    normality_defect: float
    min_real_part: float
    diagnostic: bool
    tol_cluster: float

    @property
    def multiplicities(self) -> tuple[int, ...]:
        return tuple(c.multiplicity for c in self.jordan_blocks)


def default_tol_cluster(matrix: DiffusionMatrix) -> float:
    """1e-8·‖M‖, falling back to 1e-8 for the zero matrix."""
    norm = matrix.norm()
    return 1e-8 * norm if norm > 0 else 1e-8


def _sort_key(z: complex) -> tuple[float, float]:
    return (z.real, z.imag)


def _cluster(values: list[complex], tol: float) -> list[list[complex]]:
    """Single-linkage clustering of eigenvalues at distance tol."""
    parent = list(range(len(values)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(values)):
        for j in range(i + 1, len(values)):
            if abs(values[i] - values[j]) <= tol:
                parent[find(j)] = find(i)

    groups: dict[int, list[complex]] = {}
    for i, z in enumerate(values):
        groups.setdefault(find(i), []).append(z)
    return sorted(groups.values(), key=lambda g: _sort_key(complex(np.mean(g))))


def _block_sizes(
    entries: NDArray[np.float64],
    eigenvalue: complex,
    multiplicity: int,
    tol: float,
) -> tuple[tuple[int, ...], bool]:
    """Estimate Jordan block sizes from ranks of (M − λI)^k.

    The number of blocks of size ≥ k is rank((M−λI)^(k−1)) − rank((M−λI)^k).

    Returns:
        Tuple of (block sizes in decreasing order, consistent flag). When the
        rank sequence is inconsistent the sizes fall back to all ones.
    """
    d = entries.shape[0]
    shifted = entries.astype(complex) - eigenvalue * np.eye(d)
    scale = max(1.0, float(np.linalg.norm(shifted, ord=2)))

    ranks = [d]
    power = np.eye(d, dtype=complex)
    for k in range(1, multiplicity + 2):
        power = power @ shifted
        ranks.append(int(np.linalg.matrix_rank(power, tol=tol * scale ** (k - 1))))

    at_least = [ranks[k - 1] - ranks[k] for k in range(1, multiplicity + 2)]
    sizes: list[int] = []
    for k in range(1, multiplicity + 1):
        count = at_least[k - 1] - at_least[k]
        if count < 0:
            return (1,) * multiplicity, False
        sizes.extend([k] * count)

    if sum(sizes) != multiplicity:
        return (1,) * multiplicity, False
    return tuple(sorted(sizes, reverse=True)), True


def compute_spectrum(
    matrix: DiffusionMatrix,
    tol_cluster: float | None = None,
) -> SpectrumReport:
    """Compute eigenvalues, Jordan estimates and the normality defect of M.

    Args:
        matrix: The diffusion matrix.
        tol_cluster: Clustering distance for eigenvalues; defaults to 1e-8·‖M‖.

    Returns:
        SpectrumReport for the matrix.

    Raises:
        ValueError: If tol_cluster is not positive.
        SpectrumError: If the dense eigensolver fails to converge.
    """
    tol = default_tol_cluster(matrix) if tol_cluster is None else tol_cluster
    if tol <= 0:
        raise ValueError(f"tol_cluster must be positive, got {tol}")

    try:
        raw = scipy.linalg.eigvals(matrix.entries)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise SpectrumError(f"Eigenvalue iteration failed: {e}") from e
    if not np.all(np.isfinite(raw)):
        raise SpectrumError("Eigenvalue iteration produced non-finite values")

    values = sorted((complex(z) for z in raw), key=_sort_key)
    clusters = _cluster(values, tol)

    jordan: list[JordanCluster] = []
    diagnostic = False
    for members in clusters:
        center = complex(np.mean(members))
        sizes, consistent = _block_sizes(matrix.entries, center, len(members), tol)
        diagnostic = diagnostic or len(members) > 1 or not consistent
        jordan.append(JordanCluster(center, len(members), sizes))

    return SpectrumReport(
        eigenvalues=tuple(values),
        jordan_blocks=tuple(jordan),
        normality_defect=matrix.normality_defect(),
        min_real_part=min(z.real for z in values),
        diagnostic=diagnostic,
        tol_cluster=tol,
    )
