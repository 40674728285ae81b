# utils/integrators.py
"""
Fixed-step integrators shared by every flow in the package.

RK4 serves vector states (bike directions, Riccati coordinates, AKNS
spinors); linear matrix flows in a Lie group (Lorentz lift, rolling frames,
SL₂ reductions) take fourth-order Magnus steps instead.
Coefficients of the field are tabulated once on the half-step grid, so curve
evaluators are called in a single vectorized batch per integration.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import linalg

from utils.errors import NumericalDiagnosticError, ValidationError

logger = logging.getLogger(__name__)

Field = Callable[[np.ndarray, np.ndarray], np.ndarray]
Coefficients = Callable[[np.ndarray], np.ndarray]
Projection = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class FlowResult:
    t: np.ndarray
    states: np.ndarray
    error_estimate: Optional[float] = None

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def half_step_nodes(t0: float, t1: float, steps: int) -> np.ndarray:
    return np.linspace(t0, t1, 2 * steps + 1)


def rk4_step(field: Field, c_start, c_mid, c_end, y: np.ndarray, h: float) -> np.ndarray:
    k1 = field(c_start, y)
    k2 = field(c_mid, y + 0.5 * h * k1)
    k3 = field(c_mid, y + 0.5 * h * k2)
    k4 = field(c_end, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _march(field, table, y0, t0, t1, steps, project):
    h = (t1 - t0) / steps
    y = np.array(y0)
    states = np.empty((steps + 1,) + y.shape, dtype=np.result_type(y, table))
    states[0] = y
    for k in range(steps):
        j = 2 * k
        y = rk4_step(field, table[j], table[j + 1], table[j + 2], y, h)
        if project is not None:
            y = project(y)
        states[k + 1] = y
    return states


def rk4_flow(
    field: Field,
    coefficients: Coefficients,
    y0,
    t0: float,
    t1: float,
    steps: int,
    project: Optional[Projection] = None,
    richardson: bool = False,
) -> FlowResult:
    """
    Integrate y' = field(c(t), y) from t0 to t1 in `steps` RK4 steps.

    `coefficients(ts)` is called once on the half-step grid and must return
    an array whose first axis runs over ts. With `richardson=True` the run is
    repeated at half the step and (y_h - y_{h/2}) / 15 is reported.
    """
    steps = int(steps)
    if steps < 0:
        raise ValidationError(f"steps must be >= 0, got {steps}")
    if steps == 0 or t1 == t0:
        y = np.array(y0)
        return FlowResult(t=np.array([t0]), states=y[None, ...], error_estimate=0.0 if richardson else None)

    nodes = half_step_nodes(t0, t1, steps)
    table = np.asarray(coefficients(nodes))
    states = _march(field, table, y0, t0, t1, steps, project)

    error = None
    if richardson:
        fine_nodes = half_step_nodes(t0, t1, 2 * steps)
        fine = _march(field, np.asarray(coefficients(fine_nodes)), y0, t0, t1, 2 * steps, project)
        error = float(np.max(np.abs(states[-1] - fine[-1])) / 15.0)
        logger.debug(f"[RK4] richardson estimate {error:.3e} over {steps} steps")

    return FlowResult(t=nodes[::2], states=states, error_estimate=error)


# ----------------------------------------------------------------------
# linear matrix flows
# ----------------------------------------------------------------------
def magnus_step(a_start: np.ndarray, a_mid: np.ndarray, a_end: np.ndarray, h: float) -> np.ndarray:
    """
    Fourth-order Magnus exponent for Y' = A(t)Y over one step:
    Ω = h/6 (A₀ + 4A½ + A₁) − h²/12 [A₀, A₁]. Batched over leading axes.
    """
    comm = a_start @ a_end - a_end @ a_start
    return (h / 6.0) * (a_start + 4.0 * a_mid + a_end) - (h * h / 12.0) * comm


def magnus_flow(coefficients: Coefficients, y0, t0: float, t1: float, steps: int) -> FlowResult:
    """
    Integrate the linear matrix flow Y' = A(t)Y by exponential steps.

    `coefficients(ts)` returns the generators A on the half-step grid. Each
    step multiplies by expm(Ω), so a flow with generators in a matrix Lie
    algebra (so(n,1), so(n+1), sl₂) stays in the group up to rounding.
    """
    steps = int(steps)
    if steps < 0:
        raise ValidationError(f"steps must be >= 0, got {steps}")
    y = np.array(y0)
    if steps == 0 or t1 == t0:
        return FlowResult(t=np.array([t0]), states=y[None, ...])

    nodes = half_step_nodes(t0, t1, steps)
    table = np.asarray(coefficients(nodes))
    h = (t1 - t0) / steps
    omegas = magnus_step(table[0:-1:2], table[1::2], table[2::2], h)
    factors = linalg.expm(omegas)
    states = np.empty((steps + 1,) + y.shape, dtype=np.result_type(y, factors))
    states[0] = y
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(steps):
            y = factors[k] @ y
            states[k + 1] = y
    if not np.all(np.isfinite(y)):
        raise NumericalDiagnosticError(f"[Magnus] matrix flow left the floating-point range over [{t0:g}, {t1:g}]")
    return FlowResult(t=nodes[::2], states=states)


# ----------------------------------------------------------------------
# projections onto constraint manifolds
# ----------------------------------------------------------------------
def normalize_rows(y: np.ndarray) -> np.ndarray:
    """Push unit vectors (last axis) back onto the sphere."""
    return y / np.linalg.norm(y, axis=-1, keepdims=True)


def signature_matrix(n: int) -> np.ndarray:
    """J = diag(1, ..., 1, -1) of size (n+1)."""
    j = np.eye(n + 1)
    j[n, n] = -1.0
    return j


def unitary_correction(m: np.ndarray) -> np.ndarray:
    """Pull a 2x2 complex matrix back to SU(2) (first-order polar step, then det phase)."""
    eye = np.eye(2)
    m = m @ (1.5 * eye - 0.5 * (m.conj().T @ m))
    det = np.linalg.det(m)
    return m / np.sqrt(det)


def group_defect(m: np.ndarray, metric: np.ndarray) -> float:
    """|MᵀJM − J| relative to max(1, |M|)², the scale rounding allows for large boosts."""
    scale = max(1.0, float(np.max(np.abs(m)))) ** 2
    return float(np.max(np.abs(m.T @ metric @ m - metric))) / scale
