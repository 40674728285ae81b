# commands/planimeter.py
"""
Bicycle planimeter: area operator and the ε² law.

Usage:
  planimeter --curve circle --eps 0.2,0.1,0.05,0.025
"""

from commands.command import Command
from utils.moebius_monodromy import birds_eye_check, hatchet_angle, planimeter_check
from utils.run_config import eps_sweep


class CmdPlanimeter(Command):
    """
    Check r(L) = r0 + ε²𝒜r0 + O(ε³) with ℓ = 1/ε and fit the error slope.

    For planar fronts, any --ell values also give the hatchet-planimeter
    angle and area estimate, and the bird's-eye comparison is added.

    Usage:
      planimeter --curve ID [--eps E,E,...] [--ell L,...]

    Examples:
      planimeter --curve circle
      planimeter --curve ellipse --ell 20,40
    """

    key = "planimeter"
    aliases = ["area"]
    help_category = "Monodromy"
    flags = ("curve", "curve-file", "folds", "eps", "ell")

    def func(self):
        front = self.load_front()
        eps = self.values("eps", eps_sweep())
        payload = {"curve": front.analytic_id, "planimeter": planimeter_check(front, eps).to_dict()}
        if front.dimension == 2 and front.closed:
            payload["hatchet"] = [hatchet_angle(front, ell) for ell in self.config.ell]
            payload["birds_eye"] = birds_eye_check(front, eps)
        self.write_report("planimeter", payload)
