# tests/utils/test_export.py
import json

import numpy as np
import pytest

from utils.errors import ValidationError
from utils.export import (
    canonical_json,
    export_table,
    format_float,
    read_table,
    render_table,
    to_plain,
    write_json,
)


def test_format_float_keeps_full_precision():
    assert format_float(0.1) == "0.10000000000000001"
    assert float(format_float(1 / 3)) == 1 / 3
    assert format_float(2.0) == "2.0"
    assert format_float(float("nan")) == "nan"
    assert format_float(float("-inf")) == "-inf"


def test_to_plain_converts_numpy_and_complex():
    plain = to_plain({"a": np.float64(1.5), "b": np.arange(3), "z": 1 + 2j, "flag": np.bool_(True)})
    assert plain == {"a": 1.5, "b": [0, 1, 2], "z": {"re": 1.0, "im": 2.0}, "flag": True}


def test_canonical_json_is_sorted_and_stable():
    a = canonical_json({"b": 1, "a": [0.5, None]})
    b = canonical_json({"a": [0.5, None], "b": 1})
    assert a == b
    assert a.index('"a"') < a.index('"b"')
    assert json.loads(a) == {"a": [0.5, None], "b": 1}


def test_canonical_json_writes_non_finite_as_strings():
    assert json.loads(canonical_json({"x": float("inf")})) == {"x": "inf"}


def test_csv_table_column_order_follows_first_record():
    text = render_table([{"ell": 1.0, "class": "elliptic"}, {"ell": 2.0, "class": "hyperbolic"}])
    lines = text.splitlines()
    assert lines[0] == "ell,class"
    assert lines[1] == "1.0,elliptic"


def test_mixed_record_shapes_rejected():
    with pytest.raises(ValidationError):
        render_table([{"a": 1}, {"b": 2}])
    with pytest.raises(ValidationError):
        render_table([{"a": 1}, {"a": "x"}])


def test_unknown_format_rejected():
    with pytest.raises(ValidationError):
        render_table([{"a": 1}], format="xml")


def test_empty_csv_table_is_header_only(tmp_path):
    path = export_table([], "csv", tmp_path / "empty.csv", columns=["a", "b"])
    assert path.read_text() == "a,b\n"


def test_export_and_read_csv(tmp_path):
    rows = [{"n": 1, "value": 0.25, "passed": True, "note": None}]
    path = export_table(rows, "csv", tmp_path / "t.csv")
    assert read_table(path) == rows


def test_export_and_read_json(tmp_path):
    rows = [{"n": 2, "value": float("nan")}]
    loaded = read_table(export_table(rows, "json", tmp_path / "t.json"))
    assert loaded[0]["n"] == 2
    assert np.isnan(loaded[0]["value"])


def test_write_json_leaves_no_temporary_files(tmp_path):
    write_json(tmp_path / "out" / "report.json", {"k": 1})
    assert [p.name for p in (tmp_path / "out").iterdir()] == ["report.json"]


def test_same_payload_same_bytes(tmp_path):
    payload = {"z": np.linspace(0, 1, 5), "a": {"y": 1e-17, "x": -0.0}}
    first = write_json(tmp_path / "a.json", payload).read_bytes()
    second = write_json(tmp_path / "b.json", payload).read_bytes()
    assert first == second
