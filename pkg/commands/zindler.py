# commands/zindler.py
"""
Rotation numbers and Zindler certificates of the Γ_{k,n} family.

Usage:
  zindler --k 1 --n 4
  zindler --n 7
"""

from commands.command import Command
from utils.correspondence import rotation_number_table, zindler_family_report


class CmdZindler(Command):
    """
    With --k and --n: rotation numbers of Γ_{k,n} and a Zindler certificate
    for each. With --n only: the rotation-number table for all coprime
    (k, n') with n' <= n.

    Usage:
      zindler --k K --n N
      zindler --n NMAX

    Examples:
      zindler --k 1 --n 4
      zindler --n 7 --format csv
    """

    key = "zindler"
    aliases = ["rotation"]
    help_category = "Correspondence"
    flags = ("k", "n")

    def func(self):
        config = self.config
        if config.k is not None:
            n = config.n if config.n is not None else config.k + 2
            self.write_report("zindler", zindler_family_report(config.k, n, config.samples * n))
            return
        self.write_table("rotation_numbers", rotation_number_table(config.n or 7))
