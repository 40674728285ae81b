# utils/bike_dynamics.py
"""
The bicycle equation ℓṙ = −v + (v·r)r and its equivalent formulations.

Goals:
- One integrator (utils.integrators.rk4_flow) behind every formulation so the
  sphere, Riccati, Lorentz and rolling pictures can be cross-checked.
- Riccati charts are projective: past |w| > CHART_SWAP_THRESHOLD the
  coordinate moves to the antipodal chart and the swap is counted.
- Monodromy matrices stay in their group: linear matrix flows take
  exponential (Magnus) steps, never a re-projection.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from server.conf import settings
from utils.curves import Curve, FrenetData, frenet_data, resample_arclength
from utils.errors import ContractionError, NumericalDiagnosticError, ValidationError
from utils.integrators import (
    FlowResult,
    group_defect,
    magnus_flow,
    normalize_rows,
    rk4_flow,
    rk4_step,
    signature_matrix,
)

logger = logging.getLogger(__name__)

PLANAR_CHARTS = ("planar_fixed", "planar_frame")
SPATIAL_CHARTS = ("spatial_fixed", "spatial_frame", "filament")
CHARTS = PLANAR_CHARTS + SPATIAL_CHARTS
FRAME_CHARTS = ("planar_frame", "spatial_frame", "filament")


# ----------------------------------------------------------------------
# value types
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class BikeState:
    r: np.ndarray
    t: float


@dataclass(frozen=True)
class ProjectiveCoord:
    """
    A point of S¹ or S² in a stereographic chart.

    `swapped` means `value` is the antipodal-chart coordinate −1/w̄, so the
    represented direction is minus the chart image of `value`. The point at
    infinity of a chart is the swapped coordinate 0.
    """

    value: complex
    chart: str
    swapped: bool = False

    def __post_init__(self):
        if self.chart not in CHARTS:
            raise ValidationError(f"unknown chart {self.chart!r}; expected one of {CHARTS}")
        object.__setattr__(self, "value", complex(self.value))

    @property
    def at_infinity(self) -> bool:
        return self.swapped and self.value == 0

    @property
    def planar(self) -> bool:
        return self.chart in PLANAR_CHARTS

    def unswapped(self) -> complex:
        """Coordinate in the primary chart (inf at the chart's singular point)."""
        if not self.swapped:
            return self.value
        if self.value == 0:
            return complex(math.inf)
        return -1.0 / np.conj(self.value)

    @classmethod
    def infinity(cls, chart: str) -> "ProjectiveCoord":
        return cls(0.0, chart, swapped=True)


def chart_to_sphere(coord: ProjectiveCoord) -> np.ndarray:
    """Local sphere coordinates (2 comps planar, 3 spatial) of a chart point."""
    w = coord.value
    mod2 = abs(w) ** 2
    r1 = (1.0 - mod2) / (1.0 + mod2)
    q = 2.0 * w / (1.0 + mod2)
    out = np.array([r1, q.real]) if coord.planar else np.array([r1, q.real, q.imag])
    return -out if coord.swapped else out


def sphere_to_chart(r_local, chart: str, threshold: float = settings.CHART_SWAP_THRESHOLD) -> ProjectiveCoord:
    """Inverse of chart_to_sphere; picks the antipodal chart near the singular point."""
    r = np.asarray(r_local, dtype=float)
    planar = chart in PLANAR_CHARTS
    if planar and r.shape != (2,) or not planar and r.shape != (3,):
        raise ValidationError(f"chart {chart} needs a {'2' if planar else '3'}-vector, got shape {r.shape}")
    q = complex(r[1], 0.0 if planar else r[2])
    if 1.0 + r[0] > 1e-12:
        w = q / (1.0 + r[0])
        if abs(w) <= threshold:
            return ProjectiveCoord(w.real if planar else w, chart)
    u = -q / (1.0 - r[0])
    return ProjectiveCoord(u.real if planar else u, chart, swapped=True)


@dataclass(frozen=True, eq=False)
class BikeTrajectory:
    """Sampled solution of the bicycle equation plus front and rear tracks."""

    t: np.ndarray
    r: np.ndarray
    front_points: np.ndarray
    front_velocity: np.ndarray
    ell: float
    norm_drift: float
    error_estimate: Optional[float] = None

    @property
    def rear(self) -> np.ndarray:
        """γ = Γ + ℓr (may contain cusps)."""
        return self.front_points + self.ell * self.r

    @property
    def final(self) -> np.ndarray:
        return self.r[-1]

    @property
    def dimension(self) -> int:
        return int(self.r.shape[-1])

    def states(self) -> List[BikeState]:
        return [BikeState(r=r, t=float(t)) for t, r in zip(self.t, self.r)]

    def direction_rates(self) -> np.ndarray:
        """ṙ from the equation itself at every sample."""
        v = self.front_velocity
        vr = np.einsum("...i,...i->...", self.r, v)
        return (-v + vr[..., None] * self.r) / self.ell

    def rear_curve(self) -> Curve:
        return Curve(t=self.t, points=self.rear)

    def rows(self) -> List[Dict[str, float]]:
        """Trajectory CSV records: t, r1..rn, gamma1..gamman."""
        n = self.dimension
        out = []
        for t, r, g in zip(self.t, self.r, self.rear):
            rec = {"t": float(t)}
            rec.update({f"r{i + 1}": float(r[i]) for i in range(n)})
            rec.update({f"gamma{i + 1}": float(g[i]) for i in range(n)})
            out.append(rec)
        return out


@dataclass(frozen=True, eq=False)
class ChartTrajectory:
    t: np.ndarray
    values: np.ndarray
    swapped: np.ndarray
    chart: str
    ell: complex
    swap_count: int
    basis: Optional[np.ndarray] = field(default=None, repr=False)

    def coords(self) -> List[ProjectiveCoord]:
        return [ProjectiveCoord(v, self.chart, bool(s)) for v, s in zip(self.values, self.swapped)]

    def local_sphere(self) -> np.ndarray:
        return np.array([chart_to_sphere(c) for c in self.coords()])

    def to_sphere(self) -> np.ndarray:
        """Directions in ambient coordinates (frame charts rotate by the Frenet basis)."""
        local = self.local_sphere()
        if self.basis is None:
            return local
        return np.einsum("mk,mkn->mn", local, self.basis)

    @property
    def final(self) -> ProjectiveCoord:
        return ProjectiveCoord(self.values[-1], self.chart, bool(self.swapped[-1]))


@dataclass(frozen=True, eq=False)
class LorentzMatrix:
    """Element of SO⁺(n,1) (or SO(n+1) when the metric is the identity)."""

    matrix: np.ndarray
    ell: float
    t0: float
    t1: float
    metric: np.ndarray = field(repr=False, default=None)
    path: Optional[FlowResult] = field(default=None, repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"Lorentz matrix must be square, got {m.shape}")
        object.__setattr__(self, "matrix", m)
        if self.metric is None:
            object.__setattr__(self, "metric", signature_matrix(m.shape[0] - 1))

    @property
    def n(self) -> int:
        return int(self.matrix.shape[0] - 1)

    @property
    def j_residual(self) -> float:
        return group_defect(self.matrix, self.metric)

    def to_json(self) -> Dict:
        return {
            "n": self.n,
            "ell": float(self.ell),
            "t0": float(self.t0),
            "t1": float(self.t1),
            "matrix": [float(x) for x in self.matrix.ravel()],
            "J_residual": self.j_residual,
        }


@dataclass(frozen=True, eq=False)
class RollingResult:
    """Rolling monodromy g(t1) plus the contact track traced on the rolling body."""

    matrix: LorentzMatrix
    body_points: np.ndarray
    t: np.ndarray
    front_length: float
    body_length: float

    @property
    def length_residual(self) -> float:
        return abs(self.front_length - self.body_length)

    def body_curve(self) -> Curve:
        return Curve(t=self.t, points=self.body_points)


@dataclass(frozen=True, eq=False)
class PeriodicSolution:
    """The forward-unstable periodic solution of the frame-chart Riccati equation."""

    s: np.ndarray
    Z: np.ndarray
    ell: float
    log_multiplier: complex
    mobius_multiplier: complex
    iterations: int
    periodicity_residual: float
    period: float

    @property
    def multiplier(self) -> complex:
        return complex(np.exp(self.log_multiplier / self.ell))

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.Z)))

    @property
    def multiplier_residual(self) -> float:
        """Relative gap between the quadrature and Möbius-derivative multipliers (in log form)."""
        lhs = self.log_multiplier / self.ell
        rhs = np.log(self.mobius_multiplier)
        # compare modulo 2πi
        d = lhs - rhs
        d = complex(d.real, (d.imag + math.pi) % (2 * math.pi) - math.pi)
        return float(abs(d) / max(1.0, abs(lhs)))


@dataclass(frozen=True)
class ContractionReport:
    ell: float
    factor: float
    bound: float
    disc_invariant: bool
    seeds: int

    def to_dict(self) -> Dict:
        return {
            "ell": self.ell,
            "factor": self.factor,
            "bound": self.bound,
            "disc_invariant": self.disc_invariant,
            "seeds": self.seeds,
        }


# ----------------------------------------------------------------------
# validation helpers
# ----------------------------------------------------------------------
def _check_ell(ell) -> float:
    if isinstance(ell, complex) or np.iscomplexobj(ell):
        raise ValidationError(f"ell must be real here, got {ell}")
    ell = float(ell)
    if not math.isfinite(ell) or ell <= 0.0:
        raise ValidationError(f"ell must be positive and finite, got {ell}")
    return ell


def _check_unit(r0, dimension: int) -> np.ndarray:
    r0 = np.array(r0, dtype=float)
    if r0.shape[-1] != dimension:
        raise ValidationError(f"r0 must have {dimension} components, got shape {r0.shape}")
    norms = np.linalg.norm(r0, axis=-1)
    if np.any(np.abs(norms - 1.0) > 1e-9):
        raise ValidationError(f"r0 must be a unit vector, |r0| = {norms}")
    return r0 / norms[..., None]


def _window(front: Curve, t0, t1) -> Tuple[float, float]:
    a = front.t0 if t0 is None else float(t0)
    b = front.t1 if t1 is None else float(t1)
    if not front.closed:
        lo, hi = front.t0, front.t1
        slack = 1e-9 * max(1.0, front.span)
        if min(a, b) < lo - slack or max(a, b) > hi + slack:
            raise ValidationError(f"t-range [{a}, {b}] outside the open front's domain [{lo}, {hi}]")
    return a, b


def _default_steps(front: Curve, t0: float, t1: float, steps: Optional[int]) -> int:
    if steps is not None:
        return int(steps)
    return max(1, int(math.ceil(abs(t1 - t0) / front.spacing - 1e-9)))


# ----------------------------------------------------------------------
# the sphere picture
# ----------------------------------------------------------------------
def _bicycle_field(ell: float):
    def field(v, r):
        vr = r @ v
        return (-v + vr[..., None] * r) / ell

    return field


def integrate_bicycle_sphere(
    front: Curve,
    ell: float,
    r0,
    t0: Optional[float] = None,
    t1: Optional[float] = None,
    steps: Optional[int] = None,
    richardson: bool = False,
) -> BikeTrajectory:
    """
    Integrate ℓṙ = −v + (v·r)r on S^{n−1}.

    r0 may be one direction (n,) or a batch (k, n); the batch shares the
    tabulated front velocities.
    """
    ell = _check_ell(ell)
    r0 = _check_unit(r0, front.dimension)
    a, b = _window(front, t0, t1)
    steps = _default_steps(front, a, b, steps)

    flow = rk4_flow(_bicycle_field(ell), front.velocity, r0, a, b, steps, project=normalize_rows, richardson=richardson)
    pts, vel = front.evaluate(flow.t)
    if flow.states.ndim == 3:
        pts = np.broadcast_to(pts[:, None, :], flow.states.shape)
        vel = np.broadcast_to(vel[:, None, :], flow.states.shape)
    drift = float(np.max(np.abs(np.linalg.norm(flow.states, axis=-1) - 1.0)))
    logger.debug(f"[Bike] sphere flow ell={ell:g} steps={steps} drift={drift:.2e}")
    return BikeTrajectory(
        t=flow.t,
        r=flow.states,
        front_points=np.array(pts),
        front_velocity=np.array(vel),
        ell=ell,
        norm_drift=drift,
        error_estimate=flow.error_estimate,
    )


def line_front_solution(ell: float, theta0: float, ts) -> np.ndarray:
    """Directions along the front (t, 0): tan(θ/2) = tan(θ₀/2)·e^{t/ℓ}."""
    ell = _check_ell(ell)
    ts = np.asarray(ts, dtype=float)
    y0, x0 = math.sin(theta0 / 2.0), math.cos(theta0 / 2.0)
    # (y, x) with p = y/x evolves diagonally
    y = y0 * np.exp(ts / (2.0 * ell))
    x = x0 * np.exp(-ts / (2.0 * ell))
    theta = 2.0 * np.arctan2(y, x)
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


def circle_front_solution(ell: float, theta0: float, ts, radius: float = 1.0) -> np.ndarray:
    """
    Directions for the CCW circle of radius R started at (R, 0).

    With φ = θ − t/R and p = tan(φ/2) the equation becomes ṗ = α + γp²
    (in s = t/R, ℓ' = ℓ/R); the linear lift exp(sK) gives p in closed form.
    """
    ell = _check_ell(ell)
    radius = float(radius)
    ts = np.asarray(ts, dtype=float)
    lp = ell / radius
    s = ts / radius
    alpha = -(1.0 + 1.0 / lp) / 2.0
    gamma = -(1.0 - 1.0 / lp) / 2.0
    # φ₀ = θ₀ at s = 0 (tangent angle of the circle there is π/2, reference t = 0)
    phi0 = theta0
    y0, x0 = math.sin(phi0 / 2.0), math.cos(phi0 / 2.0)
    ag = alpha * gamma
    if abs(ag) < 1e-15:
        y = y0 + s * alpha * x0
        x = x0 - s * gamma * y0
    elif ag > 0:
        w = math.sqrt(ag)
        c, sn = np.cos(w * s), np.sin(w * s) / w
        y = c * y0 + sn * alpha * x0
        x = c * x0 - sn * gamma * y0
    else:
        w = math.sqrt(-ag)
        c, sn = np.cosh(w * s), np.sinh(w * s) / w
        y = c * y0 + sn * alpha * x0
        x = c * x0 - sn * gamma * y0
    theta = 2.0 * np.arctan2(y, x) + s
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


# ----------------------------------------------------------------------
# Riccati charts
# ----------------------------------------------------------------------
def _swap_coefficients(c: np.ndarray) -> np.ndarray:
    """Coefficients of u = −1/w̄ given those of w' = α + βw + γw²."""
    return np.array([np.conj(c[2]), -np.conj(c[1]), np.conj(c[0])])


def _riccati_field(c, w):
    return c[0] + c[1] * w + c[2] * w * w


def _riccati_march(table, w0, swapped0, t0, t1, steps, swap=True, threshold=settings.CHART_SWAP_THRESHOLD):
    h = (t1 - t0) / steps
    swapped_table = np.array([_swap_coefficients(c) for c in table])
    w = complex(w0)
    sw = bool(swapped0)
    values = np.empty(steps + 1, dtype=complex)
    flags = np.empty(steps + 1, dtype=bool)
    values[0], flags[0] = w, sw
    swaps = 0
    for k in range(steps):
        tab = swapped_table if sw else table
        j = 2 * k
        w = rk4_step(_riccati_field, tab[j], tab[j + 1], tab[j + 2], w, h)
        if not np.isfinite(w):
            raise NumericalDiagnosticError(f"[Riccati] chart coordinate blew up at step {k}")
        if abs(w) > threshold:
            if not swap:
                if abs(w) > 1e8:
                    raise NumericalDiagnosticError(
                        f"[Riccati] chart singularity hit without swap margin at t={t0 + (k + 1) * h:.6g} (|w|={abs(w):.3e})"
                    )
            else:
                w = -1.0 / np.conj(w)
                sw = not sw
                swaps += 1
        values[k + 1], flags[k + 1] = w, sw
    return values, flags, swaps


def riccati_coefficients(front: Curve, ell, chart: str, ts, frenet: Optional[FrenetData] = None) -> np.ndarray:
    """Tabulate (α, β, γ) of w' = α + βw + γw² for a chart at parameters ts."""
    ts = np.asarray(ts, dtype=float)
    if chart == "planar_fixed":
        v = front.velocity(ts)
        return np.column_stack([-v[:, 1], 2.0 * v[:, 0], v[:, 1]]).astype(complex) / (2.0 * ell)
    if chart == "spatial_fixed":
        v = front.velocity(ts)
        q = v[:, 1] + 1j * v[:, 2]
        return np.column_stack([-q, 2.0 * v[:, 0], np.conj(q)]) / (2.0 * ell)

    fd = frenet if frenet is not None else frenet_data(front)
    kappa = fd.interpolate(fd.curvature, ts)
    half = -0.5 * kappa.astype(complex)
    if chart == "planar_frame":
        return np.column_stack([half, np.full(len(ts), 1.0 / ell, dtype=complex), half])
    tau = fd.interpolate(fd.require_torsion(), ts) if fd.dimension == 3 else np.zeros_like(kappa)
    if chart == "spatial_frame":
        return np.column_stack([half, 1.0 / ell - 1j * tau, half])
    if chart == "filament":
        # ℓ = −iε substituted into the frame chart
        return np.column_stack([half, 1j / ell - 1j * tau, half])
    raise ValidationError(f"unknown chart {chart!r}")


def _frame_basis(front: Curve, fd: FrenetData, ts: np.ndarray) -> np.ndarray:
    v = front.velocity(ts)
    v = v / np.linalg.norm(v, axis=1, keepdims=True)
    if front.dimension == 2:
        return np.stack([v, np.column_stack([-v[:, 1], v[:, 0]])], axis=1)
    n = fd.interpolate(fd.normal, ts)
    n = n - np.einsum("ij,ij->i", n, v)[:, None] * v
    n = n / np.linalg.norm(n, axis=1, keepdims=True)
    b = np.cross(v, n)
    return np.stack([v, n, b], axis=1)


def _chart_flow(front, ell, chart, init, t0, t1, steps, swap):
    if not isinstance(init, ProjectiveCoord):
        raise ValidationError("init must be a ProjectiveCoord")
    if init.chart != chart:
        raise ValidationError(f"init is in chart {init.chart!r}, expected {chart!r}")
    a, b = _window(front, t0, t1)
    steps = _default_steps(front, a, b, steps)
    fd = frenet_data(front) if chart in FRAME_CHARTS else None
    nodes = np.linspace(a, b, 2 * steps + 1)
    table = riccati_coefficients(front, ell, chart, nodes, frenet=fd)
    values, flags, swaps = _riccati_march(table, init.value, init.swapped, a, b, steps, swap=swap)
    ts = nodes[::2]
    basis = _frame_basis(front, fd, ts) if fd is not None else None
    if init.planar:
        values = values.real.astype(complex)
    logger.debug(f"[Riccati] chart={chart} steps={steps} swaps={swaps}")
    return ChartTrajectory(t=ts, values=values, swapped=flags, chart=chart, ell=ell, swap_count=swaps, basis=basis)


def integrate_riccati_planar(
    front: Curve,
    ell: float,
    chart: str,
    init: ProjectiveCoord,
    t0: Optional[float] = None,
    t1: Optional[float] = None,
    steps: Optional[int] = None,
    swap: bool = True,
) -> ChartTrajectory:
    """
    Planar Riccati forms: fixed chart p = tan(θ/2) or frame chart P = tan(Θ/2).

    The frame chart reads Θ against the Frenet frame and needs an arclength
    front (frenet_data raises otherwise).
    """
    if front.dimension != 2:
        raise ValidationError(f"planar Riccati needs n = 2, got n = {front.dimension}")
    if chart not in PLANAR_CHARTS:
        raise ValidationError(f"planar chart must be one of {PLANAR_CHARTS}, got {chart!r}")
    ell = _check_ell(ell)
    return _chart_flow(front, ell, chart, init, t0, t1, steps, swap)


def integrate_riccati_spatial(
    front: Curve,
    ell_or_eps,
    chart: str,
    init: ProjectiveCoord,
    t0: Optional[float] = None,
    t1: Optional[float] = None,
    steps: Optional[int] = None,
    swap: bool = True,
) -> ChartTrajectory:
    """
    Spatial complex Riccati forms in z = (r₂+ir₃)/(1+r₁).

    spatial_fixed and spatial_frame take a real ℓ > 0 (spatial_frame also
    accepts a complex ℓ, substituted literally); filament takes ε > 0 and
    is the frame chart at ℓ = −iε.
    """
    if front.dimension != 3:
        raise ValidationError(f"spatial Riccati needs n = 3, got n = {front.dimension}")
    if chart not in SPATIAL_CHARTS:
        raise ValidationError(f"spatial chart must be one of {SPATIAL_CHARTS}, got {chart!r}")
    if chart == "spatial_frame" and isinstance(ell_or_eps, complex):
        ell = complex(ell_or_eps)
        if ell == 0:
            raise ValidationError("ell must be nonzero")
    else:
        ell = _check_ell(ell_or_eps)
    return _chart_flow(front, ell, chart, init, t0, t1, steps, swap)


# ----------------------------------------------------------------------
# Lorentz lift and rolling
# ----------------------------------------------------------------------
def rolling_generator(velocity: np.ndarray, ell: float, curvature_sign: int) -> np.ndarray:
    """
    Generators of rolling a model space of radius ℓ along the front.

    curvature_sign = +1 gives (1/ℓ)[[0, v], [−vᵀ, 0]] in so(n+1) (sphere);
    −1 gives −(1/ℓ)[[0, v], [vᵀ, 0]] in so(n,1) (hyperbolic space), which is
    also the Lorentz lift of the bicycle equation.
    """
    v = np.atleast_2d(velocity)
    m, n = v.shape
    out = np.zeros((m, n + 1, n + 1))
    out[:, :n, n] = curvature_sign * v / ell
    out[:, n, :n] = -v / ell
    return out


def _matrix_flow(front: Curve, ell: float, curvature_sign: int, t0, t1, steps) -> Tuple[FlowResult, np.ndarray]:
    a, b = _window(front, t0, t1)
    steps = _default_steps(front, a, b, steps) if a != b else 0
    n = front.dimension
    metric = np.eye(n + 1) if curvature_sign > 0 else signature_matrix(n)

    def coefficients(ts):
        return rolling_generator(front.velocity(ts), ell, curvature_sign)

    flow = magnus_flow(coefficients, np.eye(n + 1), a, b, steps)
    return flow, metric


def lorentz_lift_flow(front: Curve, ell: float, t0=None, t1=None, steps=None) -> FlowResult:
    """Matrix path x(t) of ẋ = −(1/ℓ)[[0, v], [vᵀ, 0]]x from the identity."""
    ell = _check_ell(ell)
    flow, _ = _matrix_flow(front, ell, -1, t0, t1, steps)
    return flow


def lorentz_lift_monodromy(front: Curve, ell: float, t0=None, t1=None, steps=None) -> LorentzMatrix:
    """Lorentz-lift monodromy over [t0, t1]; projectively acts on S^{n−1} like the bicycle flow."""
    ell = _check_ell(ell)
    flow, metric = _matrix_flow(front, ell, -1, t0, t1, steps)
    out = LorentzMatrix(matrix=flow.final, ell=ell, t0=float(flow.t[0]), t1=float(flow.t[-1]), metric=metric, path=flow)
    logger.debug(f"[Lorentz] lift ell={ell:g} J-residual={out.j_residual:.2e}")
    return out


def _chord_sum(points: np.ndarray, metric: np.ndarray) -> float:
    d = np.diff(points, axis=0)
    return float(np.sum(np.sqrt(np.abs(np.einsum("ij,jk,ik->i", d, metric, d)))))


def _polyline_length(points: np.ndarray, metric: np.ndarray) -> float:
    """Chord length with one Richardson step (chords at h and 2h)."""
    if len(points) < 3:
        return _chord_sum(points, metric)
    fine = _chord_sum(points, metric)
    coarse_pts = points[::2] if (len(points) - 1) % 2 == 0 else np.vstack([points[::2], points[-1:]])
    coarse = _chord_sum(coarse_pts, metric)
    return (4.0 * fine - coarse) / 3.0


def _rolling(front: Curve, ell: float, curvature_sign: int, t0, t1, steps) -> RollingResult:
    ell = _check_ell(ell)
    flow, metric = _matrix_flow(front, ell, curvature_sign, t0, t1, steps)
    n = front.dimension
    e_last = np.zeros(n + 1)
    e_last[n] = 1.0
    # contact point in body coordinates: g⁻¹ applied to the point below the body centre
    # g⁻¹ = J gᵀ J on SO⁺(n,1), gᵀ on SO(n+1)
    inverse = metric @ np.transpose(flow.states, (0, 2, 1)) @ metric
    body = -ell * inverse @ e_last
    front_pts, _ = front.evaluate(flow.t)
    front_length = _polyline_length(front_pts, np.eye(n))
    body_length = _polyline_length(body, metric)
    mat = LorentzMatrix(matrix=flow.final, ell=ell, t0=float(flow.t[0]), t1=float(flow.t[-1]), metric=metric, path=flow)
    return RollingResult(matrix=mat, body_points=body, t=flow.t, front_length=front_length, body_length=body_length)


def roll_sphere(front: Curve, ell: float, t0=None, t1=None, steps=None) -> RollingResult:
    """Roll the sphere of radius ℓ without slipping or twisting along the front."""
    out = _rolling(front, ell, +1, t0, t1, steps)
    logger.debug(f"[Bike] sphere rolling ell={ell:g} length residual={out.length_residual:.2e}")
    return out


def roll_hyperbolic(front: Curve, ell: float, t0=None, t1=None, steps=None) -> LorentzMatrix:
    """Rolling monodromy of hyperbolic space of curvature −1/ℓ²; coincides with the Lorentz lift."""
    return _rolling(front, ell, -1, t0, t1, steps).matrix


def roll_hyperbolic_result(front: Curve, ell: float, t0=None, t1=None, steps=None) -> RollingResult:
    return _rolling(front, ell, -1, t0, t1, steps)


# ----------------------------------------------------------------------
# the unstable periodic solution of the frame-chart Riccati equation
# ----------------------------------------------------------------------
def _closed_arclength(front: Curve) -> Curve:
    if not front.closed:
        raise ValidationError("a closed front is required")
    if front.dimension == 2:
        front = front.embedded(3)
    if front.dimension != 3:
        raise ValidationError(f"the frame Riccati chart needs n = 3 (or planar), got n = {front.dimension}")
    if front.arclength and front.is_uniform:
        return front
    return resample_arclength(front, front.sample_count)


def _frame_table(fd: FrenetData, ell: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Coefficient samples of Z' = α + βZ + γZ² at the distinct samples and at midpoints."""
    kappa = fd.curvature
    tau = fd.require_torsion()
    mids = fd.s + 0.5 * fd.spacing
    kappa_mid = fd.interpolate(kappa, mids)
    tau_mid = fd.interpolate(tau, mids)

    def coeffs(k, t):
        half = -0.5 * k.astype(complex)
        return np.column_stack([half, 1.0 / ell - 1j * t, half])

    m = len(fd.s)
    table = np.empty((2 * m + 1, 3), dtype=complex)
    table[0:-1:2] = coeffs(kappa, tau)
    table[1::2] = coeffs(kappa_mid, tau_mid)
    table[-1] = table[0]
    return table, kappa, tau


def _period_mobius(table: np.ndarray, h: float, backward: bool) -> np.ndarray:
    """Period map of the Riccati flow as a 2x2 matrix on (y, x), w = y/x."""
    steps = (len(table) - 1) // 2

    def lin(c, y):
        k = np.array([[c[1] / 2.0, c[0]], [-c[2], -c[1] / 2.0]])
        return k @ y

    y = np.eye(2, dtype=complex)
    if backward:
        for k in range(steps, 0, -1):
            j = 2 * k
            y = rk4_step(lin, table[j], table[j - 1], table[j - 2], y, -h)
    else:
        for k in range(steps):
            j = 2 * k
            y = rk4_step(lin, table[j], table[j + 1], table[j + 2], y, h)
    return y


def _mobius(m: np.ndarray, w: complex) -> complex:
    return (m[0, 0] * w + m[0, 1]) / (m[1, 0] * w + m[1, 1])


def _riccati_pass(table: np.ndarray, z_end: complex, h: float, backward: bool) -> np.ndarray:
    """One Riccati integration over the period in the stable direction; returns Z at the samples."""
    steps = (len(table) - 1) // 2
    z = np.empty(steps + 1, dtype=complex)
    if backward:
        z[steps] = z_end
        w = complex(z_end)
        for k in range(steps, 0, -1):
            j = 2 * k
            w = rk4_step(_riccati_field, table[j], table[j - 1], table[j - 2], w, -h)
            z[k - 1] = w
    else:
        z[0] = z_end
        w = complex(z_end)
        for k in range(steps):
            j = 2 * k
            w = rk4_step(_riccati_field, table[j], table[j + 1], table[j + 2], w, h)
            z[k + 1] = w
    return z


def _periodic_solution(fd: FrenetData, ell: float) -> PeriodicSolution:
    table, kappa, tau = _frame_table(fd, ell)
    h = fd.spacing
    period = fd.length
    # the target solution is attracting for the time-reversed flow when ℓ > 0
    backward = ell > 0
    stable_map = _period_mobius(table, h, backward)

    z = 0.0 + 0.0j
    step = math.inf
    iterations = 0
    for iterations in range(1, settings.PERIODIC_MAX_ITER + 1):
        nxt = _mobius(stable_map, z)
        if not np.isfinite(nxt):
            break
        step = abs(nxt - z)
        z = nxt
        if abs(z) >= 1.0:
            break
        if step < settings.PERIODIC_TOL:
            break
    if not (np.isfinite(z) and abs(z) < 1.0 and step < settings.PERIODIC_TOL):
        logger.error(f"[Periodic] period map failed to contract: ell={ell:g} iterations={iterations} step={step:.3e} |Z|={abs(z):.3e}")
        raise ContractionError(
            f"time-reversed period map does not contract the unit disc at ell={ell:g} "
            f"(iterations={iterations}, last step={step:.3e}, |Z|={abs(z):.3e})",
            ell=ell,
            iterations=iterations,
            last_step=step,
        )

    residual = math.inf
    for _ in range(3):
        samples = _riccati_pass(table, z, h, backward)
        start, end = (samples[0], samples[-1])
        residual = float(abs(start - end))
        if residual < 1e-10:
            break
        z = start if backward else end
    if np.max(np.abs(samples)) >= 1.0:
        raise ContractionError(f"periodic solution leaves the unit disc at ell={ell:g}", ell=ell, iterations=iterations, last_step=step)

    Z = samples[:-1]
    integrand = 1.0 - 1j * ell * tau - ell * kappa * Z
    log_mult = complex(np.sum(integrand) * h)
    # derivative of the stable map at its fixed point is det / (cZ + d)²; it equals 1/λ backward, λ forward
    z0 = complex(Z[0])
    stable_derivative = np.linalg.det(stable_map) / (stable_map[1, 0] * z0 + stable_map[1, 1]) ** 2
    mobius_mult = complex(1.0 / stable_derivative if backward else stable_derivative)
    logger.info(f"[Periodic] ell={ell:g} converged in {iterations} iterations, |Z|max={np.max(np.abs(Z)):.3e}, periodicity={residual:.2e}")
    return PeriodicSolution(
        s=fd.s,
        Z=Z,
        ell=ell,
        log_multiplier=log_mult,
        mobius_multiplier=mobius_mult,
        iterations=iterations,
        periodicity_residual=residual,
        period=period,
    )


def find_unstable_periodic(front: Curve, ell: float) -> PeriodicSolution:
    """
    The periodic solution Z(t, ℓ) of Ż = (κ/2)(−1 − Z²) + (1/ℓ − iτ)Z with |Z| < 1.

    It repels forward in time; the period map of the time-reversed equation
    contracts the unit disc for small ℓ and is iterated from Z = 0 to its
    fixed point. ContractionError is raised when that fails.
    """
    ell = _check_ell(ell)
    fd = frenet_data(_closed_arclength(front))
    return _periodic_solution(fd, ell)


def log_multiplier(front: Curve, ell: float) -> complex:
    """ℓ·ln λ(ℓ); also defined for small negative ℓ (the same analytic branch)."""
    ell = float(ell)
    fd = frenet_data(_closed_arclength(front))
    if ell == 0.0:
        return complex(fd.length)
    return _periodic_solution(fd, ell).log_multiplier


def log_multiplier_taylor(
    front: Curve,
    ells: Optional[Sequence[float]] = None,
    order: int = 4,
    step: float = 0.05,
    degree: Optional[int] = None,
) -> np.ndarray:
    """
    Taylor coefficients c_0..c_order of ℓ·ln λ(ℓ) at ℓ = 0.

    By default ℓ runs over the symmetric stencil 0, ±step, ±2·step, ... and
    the coefficients come from the interpolating polynomial; with `degree`
    below the node count it is a least-squares fit instead.
    """
    fd = frenet_data(_closed_arclength(front))
    if ells is None:
        half = order // 2 + 2
        ells = step * np.arange(-half, half + 1)
    ells = np.asarray(ells, dtype=float)
    if len(ells) < order + 1:
        raise ValidationError(f"need at least {order + 1} ell values for order {order}")
    degree = len(ells) - 1 if degree is None else int(degree)
    if degree < order:
        raise ValidationError(f"fit degree {degree} is below the requested order {order}")
    values = np.array([complex(fd.length) if e == 0 else _periodic_solution(fd, float(e)).log_multiplier for e in ells])
    scale = float(np.max(np.abs(ells)))
    vander = np.vander(ells / scale, degree + 1, increasing=True).astype(complex)
    coeffs, *_ = np.linalg.lstsq(vander, values, rcond=None)
    coeffs = coeffs / scale ** np.arange(degree + 1)
    logger.info(f"[Periodic] Taylor fit over {len(ells)} ell values, degree {degree}")
    return coeffs[: order + 1]


def period_map_contraction(front: Curve, ell: float, seeds: int = 50, rng=None) -> ContractionReport:
    """
    Empirical contraction factor of the time-reversed period map on the unit disc.

    The bound exp(−∫(1/ℓ − κ) dt) holds while the disc is invariant, which is
    guaranteed when 1/ℓ exceeds max(|τ| + κ).
    """
    ell = _check_ell(ell)
    fd = frenet_data(_closed_arclength(front))
    table, kappa, tau = _frame_table(fd, ell)
    stable_map = _period_mobius(table, fd.spacing, backward=True)
    if rng is None or isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(settings.BIKEGEO_SEED if rng is None else int(rng))

    def disc(k):
        rad = np.sqrt(rng.uniform(0.0, 1.0, k)) * 0.999
        return rad * np.exp(2j * np.pi * rng.uniform(0.0, 1.0, k))

    a, b = disc(seeds), disc(seeds)
    fa = np.array([_mobius(stable_map, w) for w in a])
    fb = np.array([_mobius(stable_map, w) for w in b])
    factor = float(np.max(np.abs(fa - fb) / np.abs(a - b)))
    bound = float(math.exp(-(fd.length / ell - np.sum(kappa) * fd.spacing)))
    disc_invariant = bool(1.0 / ell > float(np.max(np.abs(tau) + kappa)))
    logger.info(f"[Periodic] contraction ell={ell:g} factor={factor:.3e} bound={bound:.3e} invariant={disc_invariant}")
    return ContractionReport(ell=ell, factor=factor, bound=bound, disc_invariant=disc_invariant, seeds=int(seeds))
