# utils/run_config.py
"""
Run configuration for the bikegeo commands.

Goals:
- One frozen record per run: everything that influences the artifacts is in
  it, including the seed, so identical configs give identical output trees.
- Values resolve env var → settings module → built-in default.
- `to_json()`/`from_json()` round-trip without loss (floats go through repr).
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Optional, Tuple

from utils.errors import ValidationError

COMMANDS = (
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
)
FORMATS = ("json", "csv")

_DEFAULTS = {
    "BIKEGEO_OUT": "bikegeo_out",
    "BIKEGEO_SAMPLES": "1024",
    "BIKEGEO_TOL": "1e-6",
    "BIKEGEO_SEED": "20240601",
    "BIKEGEO_EPS_SWEEP": "0.2,0.1,0.05,0.025",
    "BIKEGEO_LOG_LEVEL": "WARNING",
}


def _settings_value(name: str) -> Optional[str]:
    """Return a bikegeo setting if the settings module can be imported."""
    try:
        from server.conf import settings as bike_settings
    except Exception:
        return None

    value = getattr(bike_settings, name, None)
    if value is None:
        return None
    return str(value)


def resolve_setting(name: str) -> str:
    return os.getenv(name) or _settings_value(name) or _DEFAULTS[name]


def parse_float_list(text) -> Tuple[float, ...]:
    """'0.2,0.1' or a sequence → tuple of floats."""
    if text is None:
        return ()
    if isinstance(text, (int, float)):
        return (float(text),)
    if isinstance(text, str):
        parts = [p.strip() for p in text.split(",") if p.strip()]
    else:
        parts = list(text)
    try:
        return tuple(float(p) for p in parts)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"expected a comma-separated list of numbers, got {text!r}") from exc


@dataclass(frozen=True)
class RunConfig:
    command: str
    curve: Optional[str] = None
    curve_file: Optional[str] = None
    folds: int = 1
    ell: Tuple[float, ...] = ()
    eps: Tuple[float, ...] = ()
    lam: Tuple[float, ...] = ()
    k: Optional[int] = None
    n: Optional[int] = None
    samples: int = 1024
    tol: float = 1e-6
    out: str = "bikegeo_out"
    seed: int = 20240601
    format: str = "json"

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise ValidationError(f"unknown command '{self.command}' (expected one of {', '.join(COMMANDS)})")
        if self.format not in FORMATS:
            raise ValidationError(f"format must be one of {FORMATS}, got '{self.format}'")
        if self.curve and self.curve_file:
            raise ValidationError("--curve and --curve-file are mutually exclusive")
        for name in ("folds", "samples"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ValidationError(f"{name} must be a positive integer, got {value!r}")
        for name in ("k", "n"):
            value = getattr(self, name)
            if value is not None and (not isinstance(value, int) or value < 1):
                raise ValidationError(f"{name} must be a positive integer, got {value!r}")
        if not math.isfinite(self.tol) or self.tol <= 0:
            raise ValidationError(f"tol must be positive and finite, got {self.tol}")
        for name in ("ell", "eps", "lam"):
            for value in getattr(self, name):
                if not math.isfinite(value):
                    raise ValidationError(f"{name} values must be finite, got {value}")
        for value in self.ell + self.eps:
            if value <= 0:
                raise ValidationError(f"ell and eps values must be positive, got {value}")
        if not self.out:
            raise ValidationError("output directory must be set")
        return self

    @property
    def out_dir(self) -> Path:
        return Path(self.out)

    def to_json(self) -> str:
        payload = asdict(self)
        for name in ("ell", "eps", "lam"):
            payload[name] = [repr(v) for v in payload[name]]
        payload["tol"] = repr(self.tol)
        return json.dumps(payload, sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"malformed run config: {exc}") from exc
        known = {f.name for f in fields(cls)}
        unknown = set(payload) - known
        if unknown:
            raise ValidationError(f"unknown run config keys: {sorted(unknown)}")
        for name in ("ell", "eps", "lam"):
            payload[name] = tuple(float(v) for v in payload.get(name, ()))
        if "tol" in payload:
            payload["tol"] = float(payload["tol"])
        return cls(**payload).validate()


def build_run_config_from_env(command: str, **overrides) -> RunConfig:
    """
    RunConfig for `command` with env/settings defaults; `None` overrides are ignored.
    """
    try:
        base = RunConfig(
            command=command,
            samples=int(resolve_setting("BIKEGEO_SAMPLES")),
            tol=float(resolve_setting("BIKEGEO_TOL")),
            out=resolve_setting("BIKEGEO_OUT"),
            seed=int(resolve_setting("BIKEGEO_SEED")),
        )
    except ValueError as exc:
        raise ValidationError(f"invalid bikegeo environment setting: {exc}") from exc
    updates = {key: value for key, value in overrides.items() if value is not None}
    for name in ("ell", "eps", "lam"):
        if name in updates:
            updates[name] = parse_float_list(updates[name])
    return replace(base, **updates).validate()


def eps_sweep() -> Tuple[float, ...]:
    return parse_float_list(resolve_setting("BIKEGEO_EPS_SWEEP"))
