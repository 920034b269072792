"""Well-posedness analysis and spectral solvers for coupled reaction-diffusion systems."""

from __future__ import annotations

from pathlib import Path
from typing import Any

from coupledrd._version import __version__
from coupledrd.exporters import ReportExporter
from coupledrd.matrix import DiffusionMatrix
from coupledrd.parser import ConfigParser, parse_config
from coupledrd.pipeline import COMMANDS
from coupledrd.pipeline import analyze as _analyze
from coupledrd.pipeline import simulate as _simulate
from coupledrd.solver import FrameOutput
from coupledrd.types import SimulationConfig


def load_config(input_path: str | Path) -> SimulationConfig:
    """Load a run configuration from YAML.

    Args:
        input_path: Path to the YAML configuration file.

    Returns:
        SimulationConfig instance.
    """
    parser = ConfigParser()
    return parser.parse(input_path)


def analyze(
    config: str | Path | SimulationConfig,
    output: str | Path | None = None,
) -> dict[str, Any]:
    """Analyze the diffusion matrix of a configuration.

    Args:
        config: Configuration or path to a YAML configuration file.
        output: Optional report.json path.

    Returns:
        Report dict (schema-validated).
    """
    if not isinstance(config, SimulationConfig):
        config = load_config(config)
    report = _analyze(config)
    if output:
        Path(output).write_text(ReportExporter().export(report), encoding="utf-8")
    return report


def simulate(
    config: str | Path | SimulationConfig,
    out_dir: str | Path | None = None,
) -> list[FrameOutput]:
    """Run the time stepper and write frames into out_dir.

    Args:
        config: Configuration or path to a YAML configuration file.
        out_dir: Output directory; defaults to output.directory of the config.

    Returns:
        Frames in increasing time.
    """
    if not isinstance(config, SimulationConfig):
        config = load_config(config)
    exporter = _simulate(config, out_dir if out_dir is not None else config.output.directory)
    return exporter.frames


__all__ = [
    "COMMANDS",
    "DiffusionMatrix",
    "FrameOutput",
    "SimulationConfig",
    "analyze",
    "load_config",
    "parse_config",
    "simulate",
    "__version__",
]
