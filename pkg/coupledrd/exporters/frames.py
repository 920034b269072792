"""Frame, diagnostics and stationary-solution writers."""

from __future__ import annotations

import csv
import io
import logging
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

import numpy as np
from numpy.typing import NDArray

from coupledrd.exporters.report import dumps_json
from coupledrd.solver import FrameOutput, StationaryResult
from coupledrd.spectral import SpectralBasis

logger = logging.getLogger(__name__)

AXES = ("x", "y")


def format_float(value: float) -> str:
    """17 significant digits, enough to round-trip a double."""
    return format(float(value), ".16e")


def _coordinate_columns(basis: SpectralBasis) -> list[NDArray[np.float64]]:
    return [coords.ravel() for coords in basis.mesh()]


def grid_csv(
    basis: SpectralBasis,
    values: NDArray[np.float64],
    extra: Sequence[tuple[str, float]] = (),
) -> str:
    """Render grid values as CSV with columns x[,y],u1..ud plus constant extras.

    Rows follow the grid in row-major order (x outermost).
    """
    coords = _coordinate_columns(basis)
    components = [component.ravel() for component in values]
    header = [*AXES[: basis.space_dim], *(f"u{i + 1}" for i in range(len(components)))]
    header.extend(name for name, _ in extra)

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    tail = [format_float(value) for _, value in extra]
    for row in range(coords[0].size):
        cells = [format_float(c[row]) for c in coords]
        cells.extend(format_float(u[row]) for u in components)
        writer.writerow(cells + tail)
    return buffer.getvalue()


def diagnostics_csv(frames_in: Iterable[FrameOutput]) -> str:
    """One row per frame: step, time, per-component norms and extrema, Q if present."""
    frames = list(frames_in)
    if not frames:
        return ""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    d = len(frames[0].diagnostics.l2_norms)
    has_balance = frames[0].diagnostics.balance is not None
    header = ["step", "time"]
    for prefix in ("l2", "min", "max"):
        header.extend(f"{prefix}_u{i + 1}" for i in range(d))
    if has_balance:
        header.append("Q")
    writer.writerow(header)
    for frame in frames:
        diag = frame.diagnostics
        row = [str(frame.step), format_float(frame.time)]
        for series in (diag.l2_norms, diag.minima, diag.maxima):
            row.extend(format_float(x) for x in series)
        if has_balance:
            assert diag.balance is not None
            row.append(format_float(diag.balance))
        writer.writerow(row)
    return buffer.getvalue()


def write_text(path: Path, content: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(content, encoding="utf-8", newline="")
    logger.info("Wrote %s", path)
    return path


def write_json(path: Path, data: Any) -> Path:
    return write_text(path, dumps_json(data))


class FrameExporter:
    """Write frames as they are produced and the per-run summaries.

    An instance is usable as the frame sink of `solve_evolution`.
    """

    def __init__(self, out_dir: str | Path) -> None:
        """Initialize exporter.

        Args:
            out_dir: Output directory, created on first write.
        """
        self.out_dir = Path(out_dir)
        self.frames: list[FrameOutput] = []

    def __call__(self, frame: FrameOutput) -> None:
        self.write_frame(frame)

    def frame_path(self, index: int) -> Path:
        return self.out_dir / f"frame_{index:06d}.csv"

    def export(self, frame: FrameOutput) -> str:
        """Render one frame as CSV text."""
        extra: list[tuple[str, float]] = []
        if frame.diagnostics.balance is not None:
            extra.append(("Q", frame.diagnostics.balance))
        return grid_csv(frame.basis, frame.values, extra)

    def write_frame(self, frame: FrameOutput) -> Path:
        self.frames.append(frame)
        return write_text(self.frame_path(frame.index), self.export(frame))

    def write_diagnostics(self) -> Path:
        return write_text(self.out_dir / "diagnostics.csv", diagnostics_csv(self.frames))

    def write_meta(self, meta: dict[str, Any]) -> Path:
        return write_json(self.out_dir / "meta.json", meta)

    def write_stationary(self, result: StationaryResult, record: dict[str, Any]) -> list[Path]:
        """solution.csv plus stationary.json with the bound check."""
        solution = write_text(
            self.out_dir / "solution.csv", grid_csv(result.u.basis, result.u.grid())
        )
        summary = write_json(self.out_dir / "stationary.json", record)
        return [solution, summary]


def stationary_record(result: StationaryResult, epsilon: float, lam: float) -> dict[str, Any]:
    """Bound-check record for stationary.json."""
    return {
        "epsilon": epsilon,
        "lambda": lam,
        "norm_u": result.norm_u,
        "bound": result.bound,
        "bound_ok": result.bound_ok,
        "residual": result.residual,
        "iterations": result.iterations,
    }
