"""Run orchestration for the analyze, simulate, stationary and kouachi commands."""

from __future__ import annotations

import logging
import time
from pathlib import Path
from typing import Any

import numpy as np

from coupledrd._version import __version__
from coupledrd.analysis import (
    ZeroMatrixError,
    compute_spectrum,
    normality_report,
    spectrum_to_dict,
    theorem21_conditions,
    wellposedness_to_dict,
)
from coupledrd.exporters.frames import FrameExporter, stationary_record, write_json
from coupledrd.exporters.report import ReportExporter
from coupledrd.initial_data import build_initial_state
from coupledrd.kouachi import ConditionFailedError, build_kouachi, verdicts_to_dict
from coupledrd.parser import ConfigValidationError, config_to_dict
from coupledrd.reaction import accretivity_probe, sample_pairs
from coupledrd.semigroup import H0ViolationError, propagator_diagnostics
from coupledrd.solver import (
    StationaryProblem,
    basis_from_config,
    matrix_from_config,
    reaction_from_config,
    solve_evolution,
    solve_stationary_report,
)
from coupledrd.types import SimulationConfig

logger = logging.getLogger(__name__)

# Supported commands
COMMANDS = ("analyze", "simulate", "stationary", "kouachi")

# Exceptions that mean the analyzer refused the input
REFUSALS = (ZeroMatrixError, H0ViolationError, ConditionFailedError)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_REFUSED = 2

DEFAULT_PROBE_BOX = (-1.0, 1.0)
DEFAULT_PROBE_SAMPLES = 200


def error_kind(exc: BaseException) -> str:
    """Exception class name without the `Error` suffix."""
    name = type(exc).__name__
    return name[: -len("Error")] if name.endswith("Error") and name != "Error" else name


def error_document(exc: BaseException) -> dict[str, Any]:
    """Machine-readable {kind, message, details} record of a failure."""
    details: dict[str, Any] = {}
    step_index = getattr(exc, "step_index", None)
    if step_index is not None:
        details["step_index"] = step_index
    if isinstance(exc, ConfigValidationError):
        details["errors"] = exc.errors
    return {"kind": error_kind(exc), "message": str(exc), "details": details}


def exit_status(exc: BaseException) -> int:
    return EXIT_REFUSED if isinstance(exc, REFUSALS) else EXIT_FAILURE


def write_error(out_dir: str | Path, exc: BaseException) -> int:
    """Write error.json and return the exit status for exc."""
    write_json(Path(out_dir) / "error.json", error_document(exc))
    return exit_status(exc)


def _kouachi_verdicts(
    config: SimulationConfig, strict: bool | None
) -> dict[str, Any] | None:
    if config.kouachi is None:
        return None
    setup = build_kouachi(config.kouachi, config.domain, config.grid, strict=strict,
                          seed=config.seed, tol_eig=config.analysis.tol_eig)
    return verdicts_to_dict(setup.verdicts)


def analyze(config: SimulationConfig, *, strict: bool | None = None) -> dict[str, Any]:
    """Run every matrix-level analyzer and return a schema-valid report.

    Raises:
        ZeroMatrixError: If M = 0.
        ConditionFailedError: If a strict Kouachi preset fails 2α > β + γ.
    """
    matrix = matrix_from_config(config)
    tol_eig = config.analysis.tol_eig
    spectrum = compute_spectrum(matrix, config.analysis.tol_cluster)
    wellposedness = theorem21_conditions(matrix, tol_eig, bc=config.domain.bc)
    normality = normality_report(matrix, tol_eig)

    propagators = None
    if wellposedness.h0_pass:
        t = config.time.dt if config.time is not None else 1.0
        propagators = propagator_diagnostics(matrix, basis_from_config(config), t)

    reaction = reaction_from_config(config)
    rng = np.random.default_rng(config.seed)
    box = config.kouachi.probe_box if config.kouachi is not None else DEFAULT_PROBE_BOX
    n = config.kouachi.probe_samples if config.kouachi is not None else DEFAULT_PROBE_SAMPLES
    probe = accretivity_probe(reaction, sample_pairs(box, n, matrix.d, rng))

    exporter = ReportExporter()
    report = exporter.build(
        matrix, spectrum, wellposedness, normality,
        propagators=propagators,
        reaction=reaction,
        probe=probe,
        kouachi=_kouachi_verdicts(config, strict),
    )
    exporter.validate(report)
    logger.info(
        "Analysis: H0 %s, symbol accretive %s, normal %s",
        "passes" if wellposedness.h0_pass else "fails",
        wellposedness.symbol_accretive,
        normality.normal,
    )
    return report


def _run_verdicts(config: SimulationConfig) -> dict[str, Any]:
    matrix = matrix_from_config(config)
    spectrum = compute_spectrum(matrix, config.analysis.tol_cluster)
    wellposedness = theorem21_conditions(
        matrix, config.analysis.tol_eig, bc=config.domain.bc, allow_zero=True
    )
    verdicts: dict[str, Any] = {
        "spectrum": spectrum_to_dict(spectrum),
        "wellposedness": wellposedness_to_dict(wellposedness),
    }
    if wellposedness.h0_pass and config.time is not None:
        diag = propagator_diagnostics(matrix, basis_from_config(config), config.time.dt)
        verdicts["propagators"] = {
            "t": diag.t, "spectral_radius": diag.spectral_radius, "max_norm": diag.max_norm,
        }
    return verdicts


def _meta(config: SimulationConfig, command: str, verdicts: dict[str, Any],
          started: float, **extra: Any) -> dict[str, Any]:
    return {
        "version": __version__,
        "command": command,
        "config": config_to_dict(config),
        "verdicts": verdicts,
        "wall_time_s": time.perf_counter() - started,
        **extra,
    }


def simulate(
    config: SimulationConfig,
    out_dir: str | Path,
    *,
    command: str = "simulate",
    strict: bool | None = None,
    allow_h0_violation: bool = False,
) -> FrameExporter:
    """Time-step a configuration, writing frames, diagnostics.csv and meta.json."""
    started = time.perf_counter()
    if config.time is None:
        raise ValueError(f"'{command}' needs a 'time' section")
    verdicts = _run_verdicts(config)
    if command == "kouachi" and config.kouachi is None:
        raise ValueError("'kouachi' needs a 'kouachi' section")
    if config.kouachi is not None:
        verdicts["kouachi"] = _kouachi_verdicts(config, strict)

    exporter = FrameExporter(out_dir)
    frames = solve_evolution(config, sink=exporter, allow_h0_violation=allow_h0_violation)
    exporter.write_diagnostics()
    exporter.write_meta(_meta(config, command, verdicts, started, frames=len(frames),
                              final_time=frames[-1].time))
    return exporter


def stationary(config: SimulationConfig, out_dir: str | Path) -> dict[str, Any]:
    """Solve the regularized stationary problem with initial_data as v."""
    started = time.perf_counter()
    if config.stationary is None:
        raise ValueError("'stationary' needs a 'stationary' section")
    basis = basis_from_config(config)
    problem = StationaryProblem(
        epsilon=config.stationary.epsilon,
        v=build_initial_state(basis, config.initial_data),
        lam=config.stationary.lam,
        newton_tol=config.yosida.newton_tol,
        newton_max_iter=config.yosida.newton_max_iter,
        tol_eig=config.analysis.tol_eig,
    )
    result = solve_stationary_report(problem, matrix_from_config(config),
                                     reaction_from_config(config))
    record = stationary_record(result, problem.epsilon, problem.lam)
    exporter = FrameExporter(out_dir)
    exporter.write_stationary(result, record)
    exporter.write_meta(_meta(config, "stationary", _run_verdicts(config), started,
                              stationary=record))
    return record


def run(
    command: str,
    config: SimulationConfig,
    out_dir: str | Path | None = None,
    *,
    strict: bool | None = None,
    allow_h0_violation: bool = False,
) -> int:
    """Execute one command and return its exit status.

    Failures are written to error.json in the output directory; analyzer
    refusals (ZeroMatrix, H0Violation, ConditionFailed) exit with 2, every
    other failure with 1.
    """
    out = Path(out_dir if out_dir is not None else config.output.directory)
    logger.info("Running '%s' into %s", command, out)
    try:
        if command == "analyze":
            report = analyze(config, strict=strict)
            write_json(out / "report.json", report)
            if not report["wellposedness"]["h0_pass"]:
                raise H0ViolationError(
                    f"H0 fails: min Re λ(M) = {report['spectrum']['min_real_part']:.6g} < 0"
                )
        elif command in ("simulate", "kouachi"):
            simulate(config, out, command=command, strict=strict,
                     allow_h0_violation=allow_h0_violation)
        elif command == "stationary":
            stationary(config, out)
        else:
            raise ValueError(f"Unknown command: {command}. Available: {', '.join(COMMANDS)}")
    except Exception as e:
        logger.error("%s failed: %s: %s", command, type(e).__name__, e)
        return write_error(out, e)
    logger.info("'%s' finished", command)
    return EXIT_OK
