# tests/utils/test_selftest.py
import numpy as np
import pytest

from utils import selftest
from utils.correspondence import ell_kn
from utils.errors import ValidationError
from utils.run_config import RunConfig
from utils.selftest import CIRCLE_ELLS, CIRCLE_FOLDS, RANDOM_FRONTS, check_names, run_selftest


def _config(samples: int = 256) -> RunConfig:
    return RunConfig(command="selftest", samples=samples)


def test_checks_run_in_a_fixed_order():
    names = check_names()
    assert names[0] == "monodromy_classes"
    assert {"akns", "buckled_rings", "klein", "zindler", "integrals"} <= set(names)


def test_subset_passes():
    report = run_selftest(RunConfig(command="selftest", samples=1024), checks=["zindler", "integrals"])
    assert report["passed"], report["failed"]
    assert {row["check"] for row in report["checks"]} == {"zindler", "integrals"}
    assert all(set(row) == {"check", "case", "value", "expected", "residual", "tolerance", "passed"} for row in report["checks"])


def test_unknown_check_rejected():
    with pytest.raises(ValidationError):
        run_selftest(RunConfig(command="selftest"), checks=["warp"])


class TestGrids:
    def test_circle_classes_cover_every_fold_and_length(self):
        report = run_selftest(_config(), checks=["monodromy_classes"])
        rows = report["checks"]
        assert len(rows) == 17
        cases = {row["case"] for row in rows}
        for folds in CIRCLE_FOLDS:
            for ell, _ in CIRCLE_ELLS:
                assert f"n={folds} ell={ell:.6g}" in cases
        assert f"n=4 ell={ell_kn(3, 4):.6g}" in cases
        assert report["passed"], report["failed"]

    def test_random_front_checks_use_twenty_fronts(self):
        report = run_selftest(_config(), checks=["rolling", "klein"])
        rolling = [row for row in report["checks"] if row["check"] == "rolling"]
        klein = [row for row in report["checks"] if row["check"] == "klein"]
        assert RANDOM_FRONTS == 20
        assert len(rolling) == 2 * RANDOM_FRONTS
        assert len(klein) == RANDOM_FRONTS
        assert len({row["case"] for row in klein}) == RANDOM_FRONTS
        assert all(row["passed"] for row in klein)


def test_broken_check_is_recorded_and_the_rest_still_run(monkeypatch):
    def broken(config, rng):
        raise np.linalg.LinAlgError("SVD did not converge")

    monkeypatch.setitem(selftest._CHECKS, "broken", broken)
    report = run_selftest(_config(1024), checks=["broken", "zindler"])
    aborted = [row for row in report["checks"] if row["check"] == "broken"]
    assert len(aborted) == 1
    assert aborted[0]["case"] == "aborted"
    assert not aborted[0]["passed"]
    assert "LinAlgError" in aborted[0]["value"]
    assert any(row["check"] == "zindler" and row["passed"] for row in report["checks"])
    assert report["failed"] == ["broken: aborted"]
    assert not report["passed"]
