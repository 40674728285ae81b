# commands/selftest.py
"""
Run the acceptance suite.

Usage:
  selftest
  selftest --seed 7 --out /tmp/bikegeo
"""

from commands.command import Command
from utils.errors import NumericalDiagnosticError
from utils.selftest import run_selftest


class CmdSelftest(Command):
    """
    Run every acceptance check and write selftest.json. Exits 3 when any
    gate fails; the report is written either way.

    Usage:
      selftest [--seed S] [--samples N] [--out DIR]

    Examples:
      selftest
      selftest --seed 20240601
    """

    key = "selftest"
    aliases = ["check"]
    help_category = "General"
    flags = ()

    def func(self):
        report = run_selftest(self.config)
        self.write_report("selftest", report)
        if not report["passed"]:
            raise NumericalDiagnosticError(f"[Selftest] {len(report['failed'])} checks failed: {report['failed']}")
