# commands/correspond.py
"""
Bicycle correspondence: partners, residuals and monodromy conjugacy.

Usage:
  correspond --curve ellipse --ell 0.5
  correspond --k 1 --n 2 --lambda 0.3,0.7,1.5
"""

import numpy as np

from commands.command import Command
from utils.correspondence import (
    bicycle_partner,
    ell_kn,
    gamma_kn,
    monodromy_conjugacy_check,
    shift_law_check,
    verify_correspondence,
)
from utils.curves import build_curve


class CmdCorrespond(Command):
    """
    Without --k/--n: build the 2ℓ-partner of the front from r0 = e1 and
    verify the correspondence. With --k/--n: compare the λ-monodromy traces
    of Γ_{k,n} and the n-fold circle, and check the shift law for λ <= 1.

    Usage:
      correspond --curve ID --ell L[,L...]
      correspond --k K --n N [--lambda L,...]

    Examples:
      correspond --curve circle --ell 0.5
      correspond --k 1 --n 2
    """

    key = "correspond"
    aliases = ["partner"]
    help_category = "Correspondence"
    flags = ("curve", "curve-file", "folds", "ell", "lambda", "k", "n")

    def func(self):
        config = self.config
        if config.k is not None and config.n is not None:
            self._family(config.k, config.n)
            return
        front = self.load_front()
        r0 = np.eye(front.dimension)[0]
        results = []
        for i, ell in enumerate(self.values("ell", [1.0])):
            partner = bicycle_partner(front, ell, r0)
            residuals = verify_correspondence(front, partner, 2.0 * ell)
            self.write_curve(f"partner_{i}", partner)
            results.append({"ell": ell, "closed": partner.closed, **residuals.to_dict()})
        self.write_table("correspondence", results)

    def _family(self, k: int, n: int):
        samples = self.config.samples * n
        curve = gamma_kn(k, n, samples)
        circle = build_curve("circle", samples, n_folds=n)
        lams = self.values("lam", [0.3, 0.7, ell_kn(1, n), 1.5])
        self.write_curve(f"gamma_{k}_{n}", curve)
        self.write_table("conjugacy", monodromy_conjugacy_check(curve, circle, lams))
        shifts = [shift_law_check(k, n, lam, samples) for lam in lams if 0.0 < lam <= 1.0]
        self.write_report("shift_law", {"k": k, "n": n, "rows": shifts})
