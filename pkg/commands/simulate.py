# commands/simulate.py
"""
Integrate the bicycle equation along a front track.

Usage:
  simulate --curve ellipse --ell 0.5,1.5
  simulate --curve-file front.csv --ell 1
"""

import numpy as np

from commands.command import Command
from utils.bike_dynamics import integrate_bicycle_sphere


class CmdSimulate(Command):
    """
    Integrate ℓṙ = −v + (v·r)r from r0 = e1 along a front track.

    Writes one trajectory table (t, r, rear track) per run, one block of
    rows per ell, and the front curve itself.

    Usage:
      simulate --curve ID [--folds N] --ell L[,L...]
      simulate --curve-file FILE --ell L

    Examples:
      simulate --curve circle --ell 0.5
      simulate --curve helix --ell 1,2 --format json
    """

    key = "simulate"
    aliases = ["sim"]
    help_category = "Dynamics"
    flags = ("curve", "curve-file", "folds", "ell")

    def func(self):
        front = self.load_front()
        r0 = np.eye(front.dimension)[0]
        rows = []
        for ell in self.values("ell", [1.0]):
            traj = integrate_bicycle_sphere(front, ell, r0)
            for rec in traj.rows():
                rows.append({"ell": ell, **rec})
        self.write_curve("front", front)
        self.write_table("trajectory", rows)
