# tests/test_commands.py
import json

import numpy as np
import pytest

from commands.default_cmdsets import EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION, BikeCmdSet, cmd_dispatch
from commands.zindler import CmdZindler
from utils.errors import NumericalDiagnosticError


def test_every_command_is_registered():
    keys = [cmd.key for cmd in BikeCmdSet().commands]
    assert keys == [
        "simulate",
        "monodromy",
        "planimeter",
        "correspond",
        "zindler",
        "integrals",
        "akns",
        "wegner",
        "rolling",
        "selftest",
    ]
    assert BikeCmdSet().get("rotation").key == "zindler"


class TestExitCodes:
    def test_no_arguments_prints_usage(self, capsys):
        assert cmd_dispatch([]) == EXIT_VALIDATION
        assert "usage: bikegeo" in capsys.readouterr().out

    def test_help(self):
        assert cmd_dispatch(["help"]) == EXIT_OK
        assert cmd_dispatch(["zindler", "--help"]) == EXIT_OK

    def test_unknown_command(self, capsys):
        assert cmd_dispatch(["fly"]) == EXIT_VALIDATION
        assert "unknown command 'fly'" in capsys.readouterr().err

    def test_unknown_flag(self, tmp_path):
        assert cmd_dispatch(["zindler", "--bogus", "1", "--out", str(tmp_path)]) == EXIT_VALIDATION

    def test_invalid_value(self, tmp_path):
        assert cmd_dispatch(["monodromy", "--ell", "-1", "--out", str(tmp_path)]) == EXIT_VALIDATION

    def test_numerical_failure(self, tmp_path, monkeypatch):
        def broken(self):
            raise NumericalDiagnosticError("[Test] diverged")

        monkeypatch.setattr(CmdZindler, "func", broken)
        assert cmd_dispatch(["zindler", "--out", str(tmp_path)]) == EXIT_NUMERICAL

    def test_raw_linear_algebra_failure_is_numerical(self, tmp_path, monkeypatch, capsys):
        def broken(self):
            raise np.linalg.LinAlgError("SVD did not converge")

        monkeypatch.setattr(CmdZindler, "func", broken)
        assert cmd_dispatch(["zindler", "--out", str(tmp_path)]) == EXIT_NUMERICAL
        assert "LinAlgError" in capsys.readouterr().err


def test_zindler_report(tmp_path):
    code = cmd_dispatch(["zindler", "--k", "1", "--n", "4", "--samples", "1024", "--out", str(tmp_path)])
    assert code == EXIT_OK
    report = json.loads((tmp_path / "zindler.json").read_text())
    assert report["passed"]
    assert report["rho"] == [pytest.approx(0.3661, abs=1e-4), pytest.approx(0.6339, abs=1e-4)]


def test_rotation_table_as_csv(tmp_path):
    assert cmd_dispatch(["zindler", "--n", "4", "--format", "csv", "--out", str(tmp_path)]) == EXIT_OK
    lines = (tmp_path / "rotation_numbers.csv").read_text().splitlines()
    assert lines[0].startswith("k,n,")
    assert len(lines) == 4


def test_simulate_writes_front_and_trajectory(tmp_path):
    argv = ["simulate", "--curve", "circle", "--ell", "0.5,1.5", "--samples", "64", "--format", "csv", "--out", str(tmp_path)]
    assert cmd_dispatch(argv) == EXIT_OK
    assert (tmp_path / "front.csv").exists()
    rows = (tmp_path / "trajectory.csv").read_text().splitlines()
    assert rows[0].startswith("ell,t,")
    assert len(rows) == 1 + 2 * 65


def test_same_config_same_bytes(tmp_path):
    argv = ["monodromy", "--curve", "circle", "--ell", "0.5,1.5", "--samples", "256"]
    assert cmd_dispatch(argv + ["--out", str(tmp_path / "a")]) == EXIT_OK
    assert cmd_dispatch(argv + ["--out", str(tmp_path / "b")]) == EXIT_OK
    first = (tmp_path / "a" / "monodromy.json").read_bytes()
    assert first == (tmp_path / "b" / "monodromy.json").read_bytes()
    classes = [r["class"] for r in json.loads(first)["reports"]]
    assert classes == ["hyperbolic", "elliptic"]


def test_integrals_command(tmp_path):
    assert cmd_dispatch(["integrals", "--n", "4", "--out", str(tmp_path)]) == EXIT_OK
    payload = json.loads((tmp_path / "integrals.json").read_text())
    assert all(row["equal"] for row in payload["identity_chain"])
    assert (tmp_path / "integrands.json").exists()
