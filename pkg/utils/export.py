# utils/export.py
"""
Deterministic artifact writers.

Goals:
- Same records in, same bytes out (sorted JSON keys, fixed column order,
  17 significant digits for every float).
- Never leave a partial file: write to a temporary sibling, then rename.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from utils.errors import ValidationError

logger = logging.getLogger(__name__)

FORMATS = ("csv", "json")


def format_float(value: float) -> str:
    """17 significant digits; round-trips every IEEE double exactly."""
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    text = format(value, ".17g")
    if "." not in text and "e" not in text:
        text += ".0"
    return text


def write_atomic_text(path, text: str) -> Path:
    """Write text to a temporary sibling and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=str(path.parent))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    logger.debug(f"[Export] wrote {path}")
    return path


# ----------------------------------------------------------------------
# canonical JSON
# ----------------------------------------------------------------------
def to_plain(value: Any) -> Any:
    """Convert numpy scalars/arrays and complex numbers into JSON-able values."""
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_plain(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": float(value.real), "im": float(value.imag)}
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, Path):
        return str(value)
    return value


def _render(value: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    close = " " * (indent * level)
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isfinite(value):
            return format_float(value)
        return json.dumps(format_float(value))
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_render(value[k], indent, level + 1)}" for k in sorted(value)]
        return "{\n" + ",\n".join(items) + "\n" + close + "}"
    if isinstance(value, list):
        if not value:
            return "[]"
        items = [f"{pad}{_render(v, indent, level + 1)}" for v in value]
        return "[\n" + ",\n".join(items) + "\n" + close + "]"
    raise ValidationError(f"cannot serialize {type(value).__name__} to JSON")


def canonical_json(payload: Any, indent: int = 2) -> str:
    """Sorted keys, 17-digit floats, non-finite floats as strings."""
    return _render(to_plain(payload), indent, 0) + "\n"


def write_json(path, payload: Any) -> Path:
    return write_atomic_text(path, canonical_json(payload))


# ----------------------------------------------------------------------
# tables
# ----------------------------------------------------------------------
def _cell_kind(value: Any) -> str:
    if value is None:
        return "null"
    if isinstance(value, (bool, np.bool_)):
        return "bool"
    if isinstance(value, (int, float, np.integer, np.floating)):
        return "number"
    if isinstance(value, str):
        return "text"
    return "nested"


def _table_columns(records: Sequence[Dict[str, Any]], columns: Optional[Sequence[str]]) -> List[str]:
    if columns is not None:
        cols = list(columns)
    elif records:
        cols = list(records[0].keys())
    else:
        cols = []
    expected = set(cols)
    kinds: Dict[str, str] = {}
    for i, rec in enumerate(records):
        if set(rec.keys()) != expected:
            raise ValidationError(f"mixed record shapes: record {i} has keys {sorted(rec)}, expected {sorted(expected)}")
        for key in cols:
            kind = _cell_kind(rec[key])
            if kind == "null":
                continue
            seen = kinds.setdefault(key, kind)
            if seen != kind:
                raise ValidationError(f"mixed record shapes: column {key!r} holds both {seen} and {kind} values")
    return cols


def _csv_cell(value: Any) -> str:
    value = to_plain(value)
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format_float(value)
    if isinstance(value, str):
        return value
    return canonical_json(value, indent=0).replace("\n", "")


def render_table(records: Iterable[Dict[str, Any]], format: str = "csv", columns: Optional[Sequence[str]] = None) -> str:
    records = list(records)
    if format not in FORMATS:
        raise ValidationError(f"unknown table format {format!r}; expected one of {FORMATS}")
    cols = _table_columns(records, columns)
    if format == "json":
        return canonical_json([{k: rec[k] for k in cols} for rec in records])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for rec in records:
        writer.writerow([_csv_cell(rec[k]) for k in cols])
    return buf.getvalue()


def export_table(records: Iterable[Dict[str, Any]], format: str, path, columns: Optional[Sequence[str]] = None) -> Path:
    """
    Write homogeneous result records as CSV or JSON.

    Column order is the key order of the first record (or `columns`); an
    empty record list yields a header-only CSV or `[]`.
    """
    records = list(records)
    text = render_table(records, format=format, columns=columns)
    out = write_atomic_text(path, text)
    logger.info(f"[Export] {len(records)} records -> {out} ({format})")
    return out


def _parse_csv_cell(text: str) -> Any:
    if text == "":
        return None
    if text in ("true", "false"):
        return text == "true"
    if text[:1] in "[{":
        try:
            return json.loads(text)
        except json.JSONDecodeError:
            return text
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def read_table(path) -> List[Dict[str, Any]]:
    """Load records written by export_table (format chosen by suffix)."""
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"table file not found: {path}")
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        data = json.loads(text)
        if not isinstance(data, list):
            raise ValidationError(f"{path} does not hold a record list")
        return [_revive_json(rec) for rec in data]
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        return []
    header = rows[0]
    return [dict(zip(header, (_parse_csv_cell(c) for c in row))) for row in rows[1:]]


def _revive_json(value: Any) -> Any:
    if isinstance(value, dict):
        return {k: _revive_json(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_revive_json(v) for v in value]
    if isinstance(value, str) and value in ("nan", "inf", "-inf"):
        return float(value)
    return value
