# utils/errors.py
"""
Error taxonomy shared by the library and the command line.

ValidationError covers bad input (exit code 2), NumericalDiagnosticError
covers numerical contracts that did not hold (exit code 3). Raw failures
from numpy/scipy (a non-converging SVD, overflow with errstate raised) are
numerical too; `NUMERICAL_FAILURES` lists them for the places that map
errors onto exit codes or report rows.
"""

from __future__ import annotations

import numpy as np


class BikeGeoError(Exception):
    """Base class for all bikegeo failures."""


class ValidationError(BikeGeoError, ValueError):
    """Input or precondition rejected before any numerics ran."""


class NumericalDiagnosticError(BikeGeoError, RuntimeError):
    """A numerical contract (tolerance gate, chart margin, fixed point) failed."""


class ContractionError(NumericalDiagnosticError):
    """The time-reversed period map did not contract the unit disc."""

    def __init__(self, message: str, ell: float, iterations: int, last_step: float):
        super().__init__(message)
        self.ell = float(ell)
        self.iterations = int(iterations)
        self.last_step = float(last_step)


NUMERICAL_FAILURES = (NumericalDiagnosticError, np.linalg.LinAlgError, FloatingPointError, OverflowError)


def as_numerical_error(exc: BaseException) -> NumericalDiagnosticError:
    """Wrap a raw numerical failure; diagnostics pass through unchanged."""
    if isinstance(exc, NumericalDiagnosticError):
        return exc
    return NumericalDiagnosticError(f"{type(exc).__name__}: {exc}")
