"""
Commands

Commands describe what can be run from the bikegeo command line. Each one
lives in its own module and is registered in `commands/default_cmdsets.py`.

"""

from __future__ import annotations

import argparse
import inspect
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

from utils.curves import Curve, build_curve, load_curve_csv, save_curve_csv
from utils.export import export_table, write_json
from utils.run_config import RunConfig, build_run_config_from_env

logger = logging.getLogger(__name__)

# argparse definitions of every flag a command may declare in `flags`
FLAG_SPECS: Dict[str, Dict[str, Any]] = {
    "curve": {"help": "named curve id (circle, ellipse, helix, gamma_kn, wegner_linear, ...)"},
    "curve-file": {"dest": "curve_file", "help": "CSV curve file (t,x1..xn) with optional JSON sidecar"},
    "folds": {"type": int, "help": "number of times a circle is traversed"},
    "ell": {"help": "bicycle length(s), comma separated"},
    "eps": {"help": "epsilon value(s), comma separated"},
    "lambda": {"dest": "lam", "help": "spectral parameter(s), comma separated"},
    "k": {"type": int, "help": "k of the (k, n) family"},
    "n": {"type": int, "help": "n of the (k, n) family, or the series order"},
    "samples": {"type": int, "help": "samples per period (default BIKEGEO_SAMPLES)"},
    "tol": {"type": float, "help": "residual gate tolerance (default BIKEGEO_TOL)"},
    "out": {"help": "output directory (default BIKEGEO_OUT)"},
    "seed": {"type": int, "help": "seed for randomized suites (default BIKEGEO_SEED)"},
    "format": {"choices": ["json", "csv"], "help": "artifact format for tables"},
}
COMMON_FLAGS = ("samples", "tol", "out", "seed", "format")


class Command:
    """
    Base command (you may see this if a child command had no help text defined)

    The class's `__doc__` string is the `--help` text of the command, so
    document consistently here.

    """

    key: str = ""
    aliases: Sequence[str] = ()
    help_category: str = "General"
    # flags beyond COMMON_FLAGS
    flags: Sequence[str] = ()

    # Each Command class implements the following methods, called in this order
    # (only func() is actually required):
    #
    #     - parse(): turn argv into a validated RunConfig on self.config.
    #     - func(): performs the actual work and writes the artifacts.
    #
    def __init__(self):
        self.config: Optional[RunConfig] = None
        self.artifacts: List[Path] = []

    def parser(self) -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(
            prog=f"bikegeo {self.key}",
            description=inspect.cleandoc(self.__doc__ or ""),
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        for name in tuple(self.flags) + COMMON_FLAGS:
            parser.add_argument(f"--{name}", default=None, **FLAG_SPECS[name])
        return parser

    def parse(self, argv: Sequence[str]) -> RunConfig:
        # argparse exits with status 2 on unknown or malformed flags
        namespace = self.parser().parse_args(list(argv))
        self.config = build_run_config_from_env(self.key, **vars(namespace))
        return self.config

    def func(self):
        raise NotImplementedError

    def run(self, argv: Sequence[str]) -> List[Path]:
        self.parse(argv)
        logger.info(f"[CLI] {self.key} {self.config.to_json()}")
        self.func()
        return self.artifacts

    # helpers shared by the commands ---------------------------------
    def load_front(self, default: str = "circle", **params) -> Curve:
        config = self.config
        if config.curve_file:
            return load_curve_csv(config.curve_file)
        curve_id = config.curve or default
        if curve_id in ("circle", "circle_multi"):
            params.setdefault("n_folds", config.folds)
            return build_curve(curve_id, config.samples * config.folds, **params)
        return build_curve(curve_id, config.samples, **params)

    def output_path(self, name: str, suffix: Optional[str] = None) -> Path:
        return self.config.out_dir / f"{name}.{suffix or self.config.format}"

    def write_report(self, name: str, payload: Any) -> Path:
        path = write_json(self.output_path(name, "json"), payload)
        self.artifacts.append(path)
        return path

    def write_table(self, name: str, records: Iterable[Dict[str, Any]], columns: Optional[Sequence[str]] = None) -> Path:
        path = export_table(records, self.config.format, self.output_path(name), columns=columns)
        self.artifacts.append(path)
        return path

    def write_curve(self, name: str, curve: Curve) -> Path:
        path = save_curve_csv(curve, self.output_path(name, "csv"))
        self.artifacts.append(path)
        return path

    def values(self, name: str, default: Sequence[float]) -> List[float]:
        chosen = getattr(self.config, name)
        return list(chosen) if chosen else list(default)
