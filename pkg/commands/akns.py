# commands/akns.py
"""
AKNS frames, Darboux transforms and the bicycle correspondence they realize.

Usage:
  akns --eps 1
  akns --curve helix --eps 0.5 --lambda 0,0.3,1
"""

import math

import numpy as np

from commands.command import Command
from utils.curves import resample_arclength
from utils.integrable import (
    AXIS_DIRECTIONS,
    akns_integrate,
    darboux_bike_check,
    darboux_lambda_sweep,
    q_from_curve,
    stp_curve,
)


class CmdAkns(Command):
    """
    Integrate the AKNS frame at λ = 0 for q = 1/2 (or q read off a curve),
    Darboux transform it with μ = iε for each --eps, and verify that Γ and
    Γ̃ are in 2/|ε|-bicycle correspondence. Nonzero --lambda values run the
    distance-law sweep ‖Γ̃ − Γ‖·|λ − μ|² = |μ − μ̄| at the first ε.

    Usage:
      akns [--curve ID] [--eps E,...] [--lambda L,...]

    Examples:
      akns --eps 1
      akns --curve helix --eps 0.5 --lambda 0,0.3,1
    """

    key = "akns"
    aliases = ["darboux"]
    help_category = "Integrable"
    flags = ("curve", "curve-file", "folds", "eps", "lambda")

    def func(self):
        config = self.config
        if config.curve or config.curve_file:
            front = self.load_front()
            if not front.arclength:
                front = resample_arclength(front, front.sample_count)
            q = q_from_curve(front)
            t = q.t
        else:
            q = 0.5
            t = np.linspace(0.0, 4.0 * math.pi * config.folds, config.samples * config.folds + 1)

        frame = akns_integrate(q, 0.0, t)
        reports = []
        for eps in self.values("eps", [1.0]):
            report = darboux_bike_check(frame, eps, directions=AXIS_DIRECTIONS)
            reports.append(report.to_json())
            if len(reports) == 1:
                _, partner = report.darboux.curves()
                self.write_curve("stp_curve", stp_curve(frame)[0])
                self.write_curve("darboux_partner", partner)
        payload = {"samples": len(t), "frame": {"unitarity": frame.unitarity_defect, "det": frame.det_defect}, "reports": reports}
        lams = [lam for lam in config.lam if lam != 0.0]
        if lams:
            mu = 1j * self.values("eps", [1.0])[0]
            payload["lambda_sweep"] = darboux_lambda_sweep(q, mu, (1.0, 0.0), [0.0] + lams, t)
        self.write_report("akns", payload)
