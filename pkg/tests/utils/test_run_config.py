# tests/utils/test_run_config.py
import json

import pytest

from utils.errors import ValidationError
from utils.run_config import (
    RunConfig,
    build_run_config_from_env,
    eps_sweep,
    parse_float_list,
    resolve_setting,
)


def test_parse_float_list():
    assert parse_float_list("0.5, 1,2e-1") == (0.5, 1.0, 0.2)
    assert parse_float_list(3) == (3.0,)
    assert parse_float_list([1, "2"]) == (1.0, 2.0)
    assert parse_float_list(None) == ()
    with pytest.raises(ValidationError):
        parse_float_list("0.5,abc")


def test_env_wins_over_defaults(monkeypatch):
    monkeypatch.setenv("BIKEGEO_SAMPLES", "64")
    monkeypatch.setenv("BIKEGEO_SEED", "7")
    config = build_run_config_from_env("monodromy", ell="0.5,1.5")
    assert config.samples == 64
    assert config.seed == 7
    assert config.ell == (0.5, 1.5)


def test_none_overrides_keep_defaults(monkeypatch):
    monkeypatch.delenv("BIKEGEO_OUT", raising=False)
    config = build_run_config_from_env("zindler", out=None, k=1, n=4)
    assert config.out == resolve_setting("BIKEGEO_OUT")
    assert (config.k, config.n) == (1, 4)


def test_bad_env_value(monkeypatch):
    monkeypatch.setenv("BIKEGEO_SAMPLES", "many")
    with pytest.raises(ValidationError):
        build_run_config_from_env("simulate")


def test_eps_sweep_from_env(monkeypatch):
    monkeypatch.setenv("BIKEGEO_EPS_SWEEP", "0.4,0.2,0.1,0.05")
    assert eps_sweep() == (0.4, 0.2, 0.1, 0.05)


class TestValidation:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"command": "fly"},
            {"command": "simulate", "format": "xml"},
            {"command": "simulate", "curve": "circle", "curve_file": "c.csv"},
            {"command": "simulate", "samples": 0},
            {"command": "simulate", "tol": -1.0},
            {"command": "simulate", "ell": (0.0,)},
            {"command": "akns", "lam": (float("nan"),)},
            {"command": "zindler", "k": 0},
            {"command": "simulate", "out": ""},
        ],
    )
    def test_rejected(self, kwargs):
        with pytest.raises(ValidationError):
            RunConfig(**kwargs).validate()

    def test_negative_lambda_is_allowed(self):
        assert RunConfig(command="akns", lam=(-1.0, 0.0)).validate().lam == (-1.0, 0.0)


class TestJson:
    def test_round_trip_keeps_floats_exact(self):
        config = RunConfig(command="monodromy", curve="ellipse", ell=(0.1, 1.0 / 3.0), tol=1e-9)
        assert RunConfig.from_json(config.to_json()) == config

    def test_unknown_keys_rejected(self):
        payload = json.loads(RunConfig(command="simulate").to_json())
        payload["colour"] = "red"
        with pytest.raises(ValidationError):
            RunConfig.from_json(json.dumps(payload))

    def test_malformed_text_rejected(self):
        with pytest.raises(ValidationError):
            RunConfig.from_json("{not json")

    def test_keys_are_sorted(self):
        keys = list(json.loads(RunConfig(command="simulate").to_json()))
        assert keys == sorted(keys)
