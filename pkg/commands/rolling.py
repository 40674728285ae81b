# commands/rolling.py
"""
Rolling the sphere and hyperbolic space along a front.

Usage:
  rolling --curve trefoil --ell 1
"""

import numpy as np

from commands.command import Command
from utils.bike_dynamics import lorentz_lift_monodromy, roll_hyperbolic_result, roll_sphere


class CmdRolling(Command):
    """
    Roll the sphere of radius ℓ and hyperbolic space of curvature −1/ℓ²
    along the front; the hyperbolic rolling matrix should equal the Lorentz
    lift monodromy and the body tracks should keep the front's arclength.

    Usage:
      rolling --curve ID --ell L[,L...]

    Examples:
      rolling --curve trefoil --ell 1
      rolling --curve random_fourier --ell 0.5,2
    """

    key = "rolling"
    aliases = ["roll"]
    help_category = "Dynamics"
    flags = ("curve", "curve-file", "folds", "ell")

    def func(self):
        front = self.load_front("random_fourier", **({"seed": self.config.seed} if self._random() else {}))
        rows = []
        for i, ell in enumerate(self.values("ell", [1.0])):
            sphere = roll_sphere(front, ell)
            hyper = roll_hyperbolic_result(front, ell)
            lift = lorentz_lift_monodromy(front, ell)
            rows.append(
                {
                    "ell": ell,
                    "lift_gap": float(np.max(np.abs(hyper.matrix.matrix - lift.matrix))),
                    "sphere_length_residual": sphere.length_residual,
                    "hyperbolic_length_residual": hyper.length_residual,
                    "J_residual": lift.j_residual,
                }
            )
            self.write_curve(f"sphere_body_{i}", sphere.body_curve())
        self.write_table("rolling", rows)

    def _random(self) -> bool:
        return not self.config.curve_file and self.config.curve in (None, "random_fourier")
