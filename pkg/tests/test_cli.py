"""Tests for the command line, run orchestration and output files."""

import csv
import json
import math
from pathlib import Path

import numpy as np
import pytest

from coupledrd.cli import build_parser, main
from coupledrd.exporters import ReportExporter
from coupledrd.exporters.frames import diagnostics_csv, format_float, grid_csv
from coupledrd.parser import ConfigValidationError, parse_config
from coupledrd.pipeline import (
    EXIT_FAILURE,
    EXIT_OK,
    EXIT_REFUSED,
    analyze,
    error_document,
    error_kind,
    run,
)
from coupledrd.reaction import NewtonDivergenceError
from coupledrd.semigroup import H0ViolationError
from coupledrd.solver import FrameOutput, frame_diagnostics
from coupledrd.spectral import build_basis

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

TEMPLATE = """
domain:
  lengths: [3.141592653589793]
grid:
  modes_per_axis: [16]
matrix:
  d: 2
  entries: {entries}
time:
  dt: 0.01
  t_final: 0.05
  frame_stride: 2
initial_data:
  components:
    - terms: [{{kind: sine, mode: [1]}}]
    - terms: [{{kind: sine, mode: [2], amplitude: 0.5}}]
"""

KOUACHI = """
domain:
  lengths: [3.141592653589793]
grid:
  modes_per_axis: [16]
kouachi:
  alpha: {alpha}
  beta: {beta}
  gamma: {gamma}
  sigma: 1.0
  rho: 2.0
time:
  dt: 0.01
  t_final: 0.1
  frame_stride: 5
initial_data:
  components:
    - terms: [{{kind: constant, value: 1.0}}, {{kind: cosine, mode: [1], amplitude: 0.5}}]
    - terms: [{{kind: constant, value: 0.5}}]
"""

DIVERGING = """
domain:
  lengths: [3.141592653589793]
grid:
  modes_per_axis: [16]
matrix:
  d: 1
  entries: [1.0]
reaction:
  name: cubic_decay
time:
  dt: 0.1
  t_final: 0.5
  scheme: lie
yosida:
  newton_max_iter: 1
initial_data:
  components:
    - terms: [{kind: sine, mode: [1], amplitude: 5.0}]
"""


def _write(tmp_path, text, name="config.yaml"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def _matrix_config(tmp_path, entries):
    return _write(tmp_path, TEMPLATE.format(entries=entries))


def _kouachi_config(tmp_path, alpha=2.0, beta=1.0, gamma=1.0):
    return _write(tmp_path, KOUACHI.format(alpha=alpha, beta=beta, gamma=gamma))


def _read_json(path):
    return json.loads(path.read_text(encoding="utf-8"))


def _read_csv(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.reader(f))


class TestAnalyzeCommand:
    """Test the analyze command."""

    def test_zero_matrix_refused(self, tmp_path):
        config = _matrix_config(tmp_path, "[0.0, 0.0, 0.0, 0.0]")
        out = tmp_path / "out"
        assert main(["analyze", "--config", str(config), "--out", str(out)]) == EXIT_REFUSED
        error = _read_json(out / "error.json")
        assert error["kind"] == "ZeroMatrix"
        assert set(error) == {"kind", "message", "details"}

    def test_symmetric_matrix(self, tmp_path):
        config = _matrix_config(tmp_path, "[2.0, 1.0, 1.0, 2.0]")
        out = tmp_path / "out"
        assert main(["analyze", "--config", str(config), "--out", str(out)]) == EXIT_OK
        report = _read_json(out / "report.json")
        ReportExporter().validate(report)
        eigenvalues = [z["re"] for z in report["spectrum"]["eigenvalues"]]
        assert eigenvalues == pytest.approx([1.0, 3.0])
        assert report["wellposedness"]["h0_pass"]
        assert report["normality"]["normal"]
        assert not (out / "error.json").exists()

    def test_h0_violation_still_reports(self, tmp_path):
        config = _matrix_config(tmp_path, "[-1.0, 0.0, 0.0, 1.0]")
        out = tmp_path / "out"
        assert main(["analyze", "--config", str(config), "--out", str(out)]) == EXIT_REFUSED
        assert _read_json(out / "error.json")["kind"] == "H0Violation"
        report = _read_json(out / "report.json")
        assert not report["wellposedness"]["h0_pass"]
        assert report["spectrum"]["min_real_part"] == pytest.approx(-1.0)

    def test_kouachi_verdicts_in_report(self, tmp_path):
        report = analyze(parse_config(KOUACHI.format(alpha=2.0, beta=1.0, gamma=1.0)))
        assert report["kouachi"]["eigenvalues"] == [3.0, 1.0]
        assert report["kouachi"]["eq6"] is True
        assert report["kouachi"]["proposition41"] is True
        ReportExporter().validate(report)

    def test_api_writes_report(self, tmp_path):
        import coupledrd

        output = tmp_path / "report.json"
        report = coupledrd.analyze(_matrix_config(tmp_path, "[1.0, 0.0, 0.0, 1.0]"), output)
        assert _read_json(output)["matrix"] == report["matrix"]


class TestSimulateCommand:
    """Test the simulate and kouachi commands."""

    def test_writes_frames(self, tmp_path):
        config = _matrix_config(tmp_path, "[1.0, 0.5, 0.0, 1.0]")
        out = tmp_path / "out"
        assert main(["simulate", "--config", str(config), "--out", str(out)]) == EXIT_OK

        frames = sorted(out.glob("frame_*.csv"))
        assert [f.name for f in frames] == [f"frame_{i:06d}.csv" for i in range(4)]
        rows = _read_csv(frames[0])
        assert rows[0] == ["x", "u1", "u2"]
        assert len(rows) == 17
        x, u1, _ = (float(c) for c in rows[1])
        assert u1 == pytest.approx(math.sin(x))

        diagnostics = _read_csv(out / "diagnostics.csv")
        assert diagnostics[0][:2] == ["step", "time"]
        assert [row[0] for row in diagnostics[1:]] == ["0", "2", "4", "5"]

        meta = _read_json(out / "meta.json")
        assert meta["command"] == "simulate"
        assert meta["frames"] == 4
        assert meta["final_time"] == pytest.approx(0.05)
        assert meta["verdicts"]["wellposedness"]["h0_pass"]
        assert meta["verdicts"]["propagators"]["spectral_radius"] <= 1.0
        assert "kouachi" not in meta["verdicts"]

    def test_deterministic_frames(self, tmp_path):
        config = _matrix_config(tmp_path, "[1.0, 0.5, 0.0, 1.0]")
        for name in ("a", "b"):
            assert main(["simulate", "--config", str(config), "--out", str(tmp_path / name)]) == 0
        for frame in sorted((tmp_path / "a").glob("frame_*.csv")):
            assert frame.read_bytes() == (tmp_path / "b" / frame.name).read_bytes()

    def test_h0_violation_refused(self, tmp_path):
        config = _matrix_config(tmp_path, "[-0.01, 0.0, 0.0, 1.0]")
        out = tmp_path / "out"
        assert main(["simulate", "--config", str(config), "--out", str(out)]) == EXIT_REFUSED
        assert _read_json(out / "error.json")["kind"] == "H0Violation"

    def test_h0_override(self, tmp_path):
        config = _matrix_config(tmp_path, "[-0.01, 0.0, 0.0, 1.0]")
        out = tmp_path / "out"
        args = ["simulate", "--config", str(config), "--out", str(out), "--allow-h0-violation"]
        assert main(args) == EXIT_OK
        meta = _read_json(out / "meta.json")
        assert not meta["verdicts"]["wellposedness"]["h0_pass"]
        assert "propagators" not in meta["verdicts"]

    def test_configured_tolerance(self, tmp_path):
        text = TEMPLATE.format(entries="[-0.00001, 0.0, 0.0, 1.0]")
        config = parse_config(text + "analysis:\n  tol_eig: 0.001\n")
        assert analyze(config)["wellposedness"]["h0_pass"]
        assert run("simulate", config, tmp_path / "out") == EXIT_OK
        assert not (tmp_path / "out" / "error.json").exists()

    def test_newton_failure_reports_step(self, tmp_path):
        config = _write(tmp_path, DIVERGING)
        out = tmp_path / "out"
        assert main(["simulate", "--config", str(config), "--out", str(out)]) == EXIT_FAILURE
        error = _read_json(out / "error.json")
        assert error["kind"] == "NewtonDivergence"
        assert error["details"]["step_index"] == 1

    def test_kouachi_run(self, tmp_path):
        config = _kouachi_config(tmp_path)
        out = tmp_path / "out"
        assert main(["kouachi", "--config", str(config), "--out", str(out)]) == EXIT_OK
        rows = _read_csv(out / "frame_000000.csv")
        assert rows[0] == ["x", "u1", "u2", "Q"]
        assert len({row[-1] for row in rows[1:]}) == 1

        diagnostics = _read_csv(out / "diagnostics.csv")
        assert diagnostics[0][-1] == "Q"
        q = [float(row[-1]) for row in diagnostics[1:]]
        assert max(q) - min(q) <= 1e-10 * (1.0 + abs(q[0]))

        meta = _read_json(out / "meta.json")
        assert meta["command"] == "kouachi"
        assert meta["verdicts"]["kouachi"]["eigenvalues"] == [3.0, 1.0]

    def test_kouachi_strict_refusal(self, tmp_path):
        config = _kouachi_config(tmp_path, alpha=1.0, beta=2.0, gamma=2.0)
        out = tmp_path / "out"
        args = ["kouachi", "--config", str(config), "--out", str(out), "--strict"]
        assert main(args) == EXIT_REFUSED
        assert _read_json(out / "error.json")["kind"] == "ConditionFailed"

    def test_kouachi_needs_preset(self, tmp_path):
        config = _matrix_config(tmp_path, "[1.0, 0.0, 0.0, 1.0]")
        out = tmp_path / "out"
        assert main(["kouachi", "--config", str(config), "--out", str(out)]) == EXIT_FAILURE

    def test_missing_time_section(self, tmp_path):
        config = _write(tmp_path, TEMPLATE.format(entries="[1.0, 0.0, 0.0, 1.0]").replace(
            "time:\n  dt: 0.01\n  t_final: 0.05\n  frame_stride: 2\n", ""
        ))
        assert run("simulate", parse_config(config.read_text()), tmp_path / "out") == EXIT_FAILURE


class TestStationaryCommand:
    """Test the stationary command."""

    def test_bundled_config(self, tmp_path):
        out = tmp_path / "out"
        args = ["stationary", "--config", str(CONFIG_DIR / "stationary.yaml"), "--out", str(out)]
        assert main(args) == EXIT_OK
        record = _read_json(out / "stationary.json")
        assert record["bound_ok"] is True
        assert record["norm_u"] <= record["bound"]
        assert record["lambda"] == 0.01
        rows = _read_csv(out / "solution.csv")
        assert rows[0] == ["x", "u1", "u2"]
        assert len(rows) == 65
        assert _read_json(out / "meta.json")["stationary"] == record

    def test_needs_stationary_section(self, tmp_path):
        config = _matrix_config(tmp_path, "[1.0, 0.0, 0.0, 1.0]")
        out = tmp_path / "out"
        assert main(["stationary", "--config", str(config), "--out", str(out)]) == EXIT_FAILURE

    def test_configured_tolerance(self, tmp_path):
        text = TEMPLATE.format(entries="[-0.00001, 0.0, 0.0, 1.0]").replace(
            "- terms: [{kind: sine, mode: [1]}]", "- terms: []"
        )
        text += "stationary: {epsilon: 1.0, lambda: 0.1}\n"
        assert run("stationary", parse_config(text), tmp_path / "a") == EXIT_FAILURE
        assert _read_json(tmp_path / "a" / "error.json")["kind"] == "StationaryPrecondition"
        text += "analysis: {tol_eig: 0.001}\n"
        assert run("stationary", parse_config(text), tmp_path / "b") == EXIT_OK
        assert _read_json(tmp_path / "b" / "stationary.json")["bound_ok"] is True


class TestConfigFailures:
    """Test failures before any command runs."""

    def test_invalid_config(self, tmp_path):
        config = _matrix_config(tmp_path, "[1.0, 0.0, 0.0]")
        out = tmp_path / "out"
        assert main(["analyze", "--config", str(config), "--out", str(out)]) == EXIT_FAILURE
        error = _read_json(out / "error.json")
        assert error["kind"] == "ConfigValidation"
        assert any(e.startswith("matrix.entries") for e in error["details"]["errors"])

    def test_missing_config(self, tmp_path):
        out = tmp_path / "out"
        args = ["analyze", "--config", str(tmp_path / "missing.yaml"), "--out", str(out)]
        assert main(args) == EXIT_FAILURE
        assert _read_json(out / "error.json")["kind"] == "FileNotFound"

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            build_parser().parse_args(["--version"])
        assert excinfo.value.code == 0
        assert "coupledrd" in capsys.readouterr().out

    def test_command_required(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])


class TestErrorDocuments:
    """Test the error.json record."""

    def test_kind_strips_suffix(self):
        assert error_kind(H0ViolationError("x")) == "H0Violation"
        assert error_kind(StopIteration()) == "StopIteration"

    def test_step_index(self):
        document = error_document(NewtonDivergenceError("no convergence", step_index=4))
        assert document["details"] == {"step_index": 4}
        assert document["message"] == "no convergence"

    def test_validation_errors(self):
        document = error_document(ConfigValidationError(["a: bad", "b: worse"]))
        assert document["details"]["errors"] == ["a: bad", "b: worse"]

    def test_unknown_command(self, tmp_path):
        config = parse_config(TEMPLATE.format(entries="[1.0, 0.0, 0.0, 1.0]"))
        assert run("plot", config, tmp_path) == EXIT_FAILURE
        assert _read_json(tmp_path / "error.json")["kind"] == "Value"


class TestFrameWriters:
    """Test CSV rendering."""

    def test_format_float_round_trips(self):
        value = 1.0 / 3.0
        assert float(format_float(value)) == value

    def test_grid_csv_2d(self):
        basis = build_basis(2, (1.0, 2.0), "dirichlet", (2, 3))
        values = np.array([[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]])
        rows = list(csv.reader(grid_csv(basis, values).splitlines()))
        assert rows[0] == ["x", "y", "u1"]
        assert [float(row[2]) for row in rows[1:]] == [1, 2, 3, 4, 5, 6]
        assert float(rows[1][0]) == float(rows[2][0])

    def test_diagnostics_empty(self):
        assert diagnostics_csv([]) == ""

    def test_diagnostics_columns(self):
        basis = build_basis(1, 1.0, "neumann", 4)
        values = np.stack([np.ones(4), 2.0 * np.ones(4)])
        frame = FrameOutput(index=0, step=0, time=0.0, values=values, basis=basis,
                            diagnostics=frame_diagnostics(basis, values, (1.0, 1.0)))
        rows = list(csv.reader(diagnostics_csv([frame]).splitlines()))
        assert rows[0] == [
            "step", "time", "l2_u1", "l2_u2", "min_u1", "min_u2", "max_u1", "max_u2", "Q",
        ]
        assert float(rows[1][-1]) == pytest.approx(3.0)
