# commands/integrals.py
"""
Symbolic monodromy integrands and filament integrals.

Usage:
  integrals --n 4
  integrals --n 4 --curve ellipse
"""

from commands.command import Command
from utils.curves import frenet_data, resample_arclength
from utils.diffpoly import evaluate_on_curve, identity_chain, integrand_table, monodromy_integrands, parity_report


class CmdIntegrals(Command):
    """
    Table of Z_n, I_n (raw and reduced mod total derivatives) and F_n up to
    order --n, the identity chain I_n ≡ c·F_{n+1} with witnesses, and the
    parity observation. With a curve, the reduced integrands are also
    integrated along it.

    Usage:
      integrals [--n N] [--curve ID]

    Examples:
      integrals --n 4
      integrals --n 6 --curve circle
    """

    key = "integrals"
    aliases = ["series"]
    help_category = "Integrable"
    flags = ("n", "curve", "curve-file", "folds")

    def func(self):
        config = self.config
        order = config.n if config.n is not None else 4
        self.write_table("integrands", integrand_table(order))
        payload = {"order": order, "identity_chain": identity_chain(), "parity": parity_report(order)}
        if config.curve or config.curve_file:
            front = self.load_front()
            if not front.arclength:
                front = resample_arclength(front, front.sample_count)
            geo = frenet_data(front)
            payload["values"] = [
                {"n": n, "value": evaluate_on_curve(p, geo)} for n, p in enumerate(monodromy_integrands(order, reduced=True))
            ]
        self.write_report("integrals", payload)
