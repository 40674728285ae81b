# commands/monodromy.py
"""
Classify the bicycle monodromy of a closed front.

Usage:
  monodromy --curve circle --folds 3 --ell 1.1547
"""

from commands.command import Command
from utils.moebius_monodromy import monodromy_report


class CmdMonodromy(Command):
    """
    Monodromy class, trace, fixed points, derivatives, rear lengths and
    Berry areas of a closed front, one report per ell.

    Usage:
      monodromy --curve ID [--folds N] --ell L[,L...]

    Examples:
      monodromy --curve circle --folds 3 --ell 1.1547
      monodromy --curve space_wave --ell 0.5,2
    """

    key = "monodromy"
    aliases = ["mono"]
    help_category = "Monodromy"
    flags = ("curve", "curve-file", "folds", "ell")

    def func(self):
        front = self.load_front()
        reports = [monodromy_report(front, ell).to_json() for ell in self.values("ell", [1.0])]
        self.write_report(
            "monodromy",
            {"curve": front.analytic_id, "folds": self.config.folds, "samples": self.config.samples, "reports": reports},
        )
