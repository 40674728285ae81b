r"""
bikegeo settings file.

Module-level defaults for every pipeline. Each value can be overridden by the
environment variable of the same name; run-level overrides (command-line
flags) are applied on top of these by `utils.run_config`.

Remember:

Keep numeric constants here rather than scattered through the library, so
tests and the command line agree on the same gates.
"""

import os
from pathlib import Path

######################################################################
# Output and reproducibility
######################################################################

PROJECT_NAME = "bikegeo"
BIKEGEO_OUT = os.getenv(
    "BIKEGEO_OUT",
    str(Path.cwd() / "bikegeo_out"),
)
BIKEGEO_SEED = int(os.getenv("BIKEGEO_SEED", "20240601"))
BIKEGEO_LOG_LEVEL = os.getenv("BIKEGEO_LOG_LEVEL", "WARNING")

######################################################################
# Sampling and residual gates
######################################################################

BIKEGEO_SAMPLES = int(os.getenv("BIKEGEO_SAMPLES", "1024"))
BIKEGEO_TOL = float(os.getenv("BIKEGEO_TOL", "1e-6"))
BIKEGEO_EPS_SWEEP = os.getenv("BIKEGEO_EPS_SWEEP", "0.2,0.1,0.05,0.025")
MIN_CLOSED_SAMPLES = 8

######################################################################
# Numerical constants
######################################################################

# Riccati charts swap to the antipodal chart past this modulus.
CHART_SWAP_THRESHOLD = 10.0
# ||trace| - 2| below this (times the matrix norm) reads as parabolic.
PARABOLIC_BAND = 1e-6
# Distance of the SL2 reduction from +-I that reads as trivial.
TRIVIAL_TOL = 1e-6
# Torsion is unavailable where curvature < factor / mean spacing.
TORSION_THRESHOLD_FACTOR = 1e-8
# Fixed-point iteration of the time-reversed period map.
PERIODIC_TOL = 1e-12
PERIODIC_MAX_ITER = 500
# Butterfly completion treats A, C as collinear-degenerate below this scale.
COLLINEAR_TOL = 1e-10
# Zindler residual gate, relative to the curve scale.
ZINDLER_TOL = 1e-6
# Largest weight for which total-derivative reduction is attempted.
DIFFPOLY_MAX_WEIGHT = int(os.getenv("BIKEGEO_DIFFPOLY_MAX_WEIGHT", "8"))
# Filament integrals listed explicitly; higher ones are generated.
FILAMENT_EXPLICIT = 5
