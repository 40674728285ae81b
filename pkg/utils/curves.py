# utils/curves.py
"""
Sampled tracks in R^n.

Goals:
- Immutable: a Curve never changes after construction.
- Exact where possible: analytic ids carry a closed-form evaluator that the
  integrators call at off-grid parameters (RK4 midpoints).
- Periodic-aware: closed curves store the wrap-around sample twice and every
  stencil wraps.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np
from scipy import integrate, interpolate

from server.conf import settings
from utils.errors import ValidationError

logger = logging.getLogger(__name__)

Evaluator = Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]]

_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True, eq=False)
class Curve:
    """
    A parametrized track Γ(t) sampled at strictly increasing parameters.

    `evaluator(ts) -> (points, velocities)` is optional; without it the curve
    is interpolated (trigonometric for uniformly sampled closed curves, cubic
    spline otherwise). `tangents` optionally carries exact velocities at the
    samples.
    """

    t: np.ndarray
    points: np.ndarray
    closed: bool = False
    period: Optional[float] = None
    analytic_id: Optional[str] = None
    params: Dict[str, Any] = field(default_factory=dict)
    evaluator: Optional[Evaluator] = field(default=None, repr=False)
    tangents: Optional[np.ndarray] = field(default=None, repr=False)
    arclength: bool = False

    def __post_init__(self):
        t = np.array(self.t, dtype=float)
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or t.ndim != 1 or len(t) != len(pts):
            raise ValidationError(f"Curve needs t of shape (m,) and points of shape (m, n), got {t.shape} and {pts.shape}")
        if pts.shape[1] < 2:
            raise ValidationError(f"Curve dimension must be >= 2, got {pts.shape[1]}")
        if len(t) < 2 or np.any(np.diff(t) <= 0):
            raise ValidationError("Curve parameters must be strictly increasing with at least two samples")

        if self.closed:
            if self.period is None:
                raise ValidationError("closed Curve requires a period")
            period = float(self.period)
            if abs((t[-1] - t[0]) - period) > 1e-9 * max(1.0, period):
                raise ValidationError(f"closed Curve must span exactly one period ({period}), spans {t[-1] - t[0]}")
            if len(t) < settings.MIN_CLOSED_SAMPLES + 1:
                raise ValidationError(f"closed Curve needs at least {settings.MIN_CLOSED_SAMPLES} samples per period")
            scale = max(1.0, float(np.max(np.abs(pts))))
            gap = float(np.linalg.norm(pts[-1] - pts[0]))
            if gap > 1e-6 * scale:
                raise ValidationError(f"closed Curve does not close: endpoint gap {gap:.3e}")
            pts[-1] = pts[0]
            object.__setattr__(self, "period", period)
        elif self.period is not None:
            object.__setattr__(self, "period", float(self.period))

        steps = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        if np.any(steps <= 0.0):
            raise ValidationError("consecutive Curve samples coincide (not a regular immersion at this resolution)")

        t.setflags(write=False)
        pts.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "points", pts)
        if self.tangents is not None:
            tan = np.array(self.tangents, dtype=float)
            if tan.shape != pts.shape:
                raise ValidationError("Curve tangents must match the points array")
            tan.setflags(write=False)
            object.__setattr__(self, "tangents", tan)

    # ------------------------------------------------------------------
    # shape
    # ------------------------------------------------------------------
    @property
    def dimension(self) -> int:
        return int(self.points.shape[1])

    @property
    def t0(self) -> float:
        return float(self.t[0])

    @property
    def t1(self) -> float:
        return float(self.t[-1])

    @property
    def span(self) -> float:
        return self.t1 - self.t0

    @property
    def sample_count(self) -> int:
        """Distinct samples (the duplicated wrap sample is not counted)."""
        return len(self.t) - 1 if self.closed else len(self.t)

    @property
    def spacing(self) -> float:
        return self.span / (len(self.t) - 1)

    @property
    def is_uniform(self) -> bool:
        d = np.diff(self.t)
        return bool(np.max(np.abs(d - d.mean())) <= 1e-9 * max(1.0, abs(d.mean())))

    # ------------------------------------------------------------------
    # evaluation
    # ------------------------------------------------------------------
    def evaluate(self, ts) -> Tuple[np.ndarray, np.ndarray]:
        """Points and velocities at arbitrary parameters (wrapped if closed)."""
        ts = np.asarray(ts, dtype=float)
        if self.evaluator is not None:
            pts, vel = self.evaluator(ts)
            return np.asarray(pts, dtype=float), np.asarray(vel, dtype=float)
        if self.closed and self.is_uniform:
            return self._fourier(ts)
        spline = self._spline
        return spline(ts), spline(ts, 1)

    def velocity(self, ts) -> np.ndarray:
        return self.evaluate(ts)[1]

    def sample_velocities(self) -> np.ndarray:
        if self.tangents is not None:
            return np.array(self.tangents)
        return self.evaluate(self.t)[1]

    @cached_property
    def _spline(self):
        if self.closed:
            return interpolate.CubicSpline(self.t, self.points, axis=0, bc_type="periodic")
        return interpolate.CubicSpline(self.t, self.points, axis=0, bc_type="not-a-knot")

    @cached_property
    def _fourier_coefficients(self):
        n = self.sample_count
        coeffs = np.fft.fft(self.points[:-1], axis=0) / n
        freqs = np.fft.fftfreq(n, d=1.0 / n)
        if n % 2 == 0:
            coeffs[n // 2] = 0.0
        return coeffs, freqs

    def _fourier(self, ts: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        coeffs, freqs = self._fourier_coefficients
        omega = 2.0 * math.pi / self.period
        flat = np.atleast_1d(ts).ravel()
        phase = np.exp(1j * omega * np.outer(flat - self.t0, freqs))
        pts = (phase @ coeffs).real
        vel = ((phase * (1j * omega * freqs)) @ coeffs).real
        shape = np.shape(ts) + (self.dimension,)
        return pts.reshape(shape), vel.reshape(shape)

    # ------------------------------------------------------------------
    # derived curves
    # ------------------------------------------------------------------
    def reversed(self) -> "Curve":
        """Same track traversed backwards over the same parameter window."""
        a, b = self.t0, self.t1
        new_t = (a + b) - self.t[::-1]
        evaluator = None
        if self.evaluator is not None:
            inner = self.evaluator

            def evaluator(ts):
                pts, vel = inner(a + b - np.asarray(ts, dtype=float))
                return pts, -vel

        tangents = None if self.tangents is None else -self.tangents[::-1]
        return Curve(
            t=new_t,
            points=self.points[::-1],
            closed=self.closed,
            period=self.period,
            analytic_id=self.analytic_id,
            params={**self.params, "reversed": not self.params.get("reversed", False)},
            evaluator=evaluator,
            tangents=tangents,
            arclength=self.arclength,
        )

    def transformed(self, rotation=None, offset=None, scale: float = 1.0) -> "Curve":
        """Apply x -> scale * R x + offset (R orthogonal; reflections allowed)."""
        n = self.dimension
        rot = np.eye(n) if rotation is None else np.asarray(rotation, dtype=float)
        shift = np.zeros(n) if offset is None else np.asarray(offset, dtype=float)
        if rot.shape != (n, n):
            raise ValidationError(f"rotation must be {n}x{n}")
        evaluator = None
        if self.evaluator is not None:
            inner = self.evaluator

            def evaluator(ts):
                pts, vel = inner(ts)
                return scale * pts @ rot.T + shift, scale * vel @ rot.T

        tangents = None if self.tangents is None else scale * self.tangents @ rot.T
        return Curve(
            t=self.t,
            points=scale * self.points @ rot.T + shift,
            closed=self.closed,
            period=self.period,
            analytic_id=self.analytic_id,
            params=dict(self.params),
            evaluator=evaluator,
            tangents=tangents,
            arclength=self.arclength and scale == 1.0,
        )

    def embedded(self, dimension: int) -> "Curve":
        """Pad coordinates with zeros to live in a higher-dimensional space."""
        extra = dimension - self.dimension
        if extra < 0:
            raise ValidationError(f"cannot embed a {self.dimension}-curve into R^{dimension}")
        if extra == 0:
            return self
        evaluator = None
        if self.evaluator is not None:
            inner = self.evaluator

            def evaluator(ts):
                pts, vel = inner(ts)
                pad = np.zeros(np.shape(pts)[:-1] + (extra,))
                return np.concatenate([pts, pad], axis=-1), np.concatenate([vel, pad], axis=-1)

        pad = np.zeros((len(self.t), extra))
        tangents = None if self.tangents is None else np.hstack([self.tangents, pad])
        return Curve(
            t=self.t,
            points=np.hstack([self.points, pad]),
            closed=self.closed,
            period=self.period,
            analytic_id=self.analytic_id,
            params=dict(self.params),
            evaluator=evaluator,
            tangents=tangents,
            arclength=self.arclength,
        )


@dataclass(frozen=True, eq=False)
class FrenetData:
    """
    Frenet frame along an arclength-sampled curve.

    For closed curves the arrays cover the distinct samples only (the wrap
    sample is dropped). For n = 2 the curvature is signed and normal = J v;
    for n = 3 curvature >= 0 and torsion is NaN where unavailable.
    """

    s: np.ndarray
    tangent: np.ndarray
    normal: np.ndarray
    curvature: np.ndarray
    spacing: float
    closed: bool
    binormal: Optional[np.ndarray] = None
    torsion: Optional[np.ndarray] = None
    torsion_available: Optional[np.ndarray] = None

    @property
    def dimension(self) -> int:
        return int(self.tangent.shape[1])

    @property
    def length(self) -> float:
        return self.spacing * len(self.s) if self.closed else float(self.s[-1] - self.s[0])

    @property
    def darboux_vector(self) -> np.ndarray:
        """Ω = τE₁ + κE₃ in frame coordinates (n = 3)."""
        if self.torsion is None:
            raise ValidationError("darboux vector needs n = 3 Frenet data")
        zeros = np.zeros_like(self.curvature)
        return np.column_stack([self.torsion, zeros, self.curvature])

    def require_torsion(self) -> np.ndarray:
        if self.torsion is None or self.torsion_available is None or not np.all(self.torsion_available):
            raise ValidationError("torsion unavailable (curvature below threshold at some samples)")
        return self.torsion

    def derivative(self, values: np.ndarray, order: int) -> np.ndarray:
        """Arclength derivative of a per-sample scalar profile."""
        if order == 0:
            return np.array(values)
        if self.closed:
            return spectral_derivative(values, self.spacing, order)
        out = np.array(values, dtype=complex if np.iscomplexobj(values) else float)
        for _ in range(order):
            out = np.gradient(out, self.spacing, edge_order=2)
        return out

    def interpolate(self, values: np.ndarray, ts) -> np.ndarray:
        """Evaluate a per-sample profile at arbitrary arclength parameters."""
        values = np.asarray(values)
        if self.closed:
            s = np.append(self.s, self.s[0] + self.length)
            vals = np.concatenate([values, values[:1]], axis=0)
            spline = interpolate.CubicSpline(s, vals, axis=0, bc_type="periodic")
        else:
            spline = interpolate.CubicSpline(self.s, values, axis=0)
        return spline(np.asarray(ts, dtype=float))


# ----------------------------------------------------------------------
# stencils
# ----------------------------------------------------------------------
def _centered_derivatives(f: np.ndarray, h: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """4th-order centered first/second/third derivatives on a padded array (3 ghost samples per side)."""
    c = slice(3, -3)

    def sh(k):
        return f[3 + k : len(f) - 3 + k]

    d1 = (-sh(2) + 8 * sh(1) - 8 * sh(-1) + sh(-2)) / (12 * h)
    d2 = (-sh(2) + 16 * sh(1) - 30 * f[c] + 16 * sh(-1) - sh(-2)) / (12 * h * h)
    d3 = (-sh(3) + 8 * sh(2) - 13 * sh(1) + 13 * sh(-1) - 8 * sh(-2) + sh(-3)) / (8 * h**3)
    return d1, d2, d3


def spectral_derivative(values: np.ndarray, spacing: float, order: int = 1) -> np.ndarray:
    """Periodic Fourier derivative of uniformly spaced samples (distinct samples only)."""
    values = np.asarray(values)
    n = values.shape[0]
    k = 2.0 * math.pi * np.fft.fftfreq(n, d=spacing)
    if n % 2 == 0:
        k[n // 2] = 0.0
    shape = (n,) + (1,) * (values.ndim - 1)
    out = np.fft.ifft(((1j * k) ** order).reshape(shape) * np.fft.fft(values, axis=0), axis=0)
    return out if np.iscomplexobj(values) else out.real


# ----------------------------------------------------------------------
# registry of analytic forms
# ----------------------------------------------------------------------
_CURVE_BUILDERS: Dict[str, Callable[..., Curve]] = {}


def register_curve(curve_id: str):
    """Register a builder `func(samples, **params) -> Curve` under an analytic id."""

    def decorator(func):
        _CURVE_BUILDERS[curve_id] = func
        return func

    return decorator


def known_curve_ids():
    return sorted(_CURVE_BUILDERS)


def build_curve(curve_id: str, samples_per_period: int = settings.BIKEGEO_SAMPLES, **params) -> Curve:
    """
    Build a sampled Curve from a named closed form.

    samples_per_period counts distinct samples over the whole period (closed)
    or the whole window (open).
    """
    if int(samples_per_period) < settings.MIN_CLOSED_SAMPLES:
        raise ValidationError(f"samples_per_period must be >= {settings.MIN_CLOSED_SAMPLES}, got {samples_per_period}")
    _ensure_lazy_builders()
    builder = _CURVE_BUILDERS.get(curve_id)
    if builder is None:
        raise ValidationError(f"unknown curve id {curve_id!r}; known: {', '.join(known_curve_ids())}")
    curve = builder(int(samples_per_period), **params)
    logger.debug(f"[Curves] built {curve_id} n={curve.dimension} samples={curve.sample_count} closed={curve.closed}")
    return curve


def _ensure_lazy_builders():
    # gamma_kn and the Wegner families live with the theory that defines them.
    if "gamma_kn" not in _CURVE_BUILDERS:
        import utils.correspondence  # noqa: F401
    if "wegner_linear" not in _CURVE_BUILDERS:
        import utils.integrable  # noqa: F401


def analytic_curve(
    curve_id: str,
    func: Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]],
    t0: float,
    t1: float,
    samples: int,
    closed: bool,
    params: Dict[str, Any],
    arclength: bool = False,
) -> Curve:
    """Sample a closed-form evaluator on a uniform grid."""
    if closed:
        ts = np.linspace(t0, t1, samples + 1)
    else:
        ts = np.linspace(t0, t1, samples)
    pts, _ = func(ts)
    return Curve(
        t=ts,
        points=pts,
        closed=closed,
        period=(t1 - t0) if closed else None,
        analytic_id=curve_id,
        params=dict(params),
        evaluator=func,
        arclength=arclength,
    )


def _pad(arr: np.ndarray, dimension: int) -> np.ndarray:
    if dimension < arr.shape[-1]:
        raise ValidationError(f"dimension must be >= {arr.shape[-1]}")
    if dimension == arr.shape[-1]:
        return arr
    pad = np.zeros(arr.shape[:-1] + (dimension - arr.shape[-1],))
    return np.concatenate([arr, pad], axis=-1)


@register_curve("line")
def _line(samples: int, T: float = 10.0, dimension: int = 2, t0: float = 0.0) -> Curve:
    T = float(T)
    if T <= 0:
        raise ValidationError(f"line length T must be positive, got {T}")

    def func(ts):
        ts = np.asarray(ts, dtype=float)
        pts = np.zeros(ts.shape + (int(dimension),))
        vel = np.zeros_like(pts)
        pts[..., 0] = ts
        vel[..., 0] = 1.0
        return pts, vel

    return analytic_curve("line", func, float(t0), float(t0) + T, samples, False, {"T": T, "dimension": int(dimension)}, arclength=True)


@register_curve("circle_multi")
def _circle_multi(
    samples: int,
    n_folds: int = 1,
    radius: float = 1.0,
    dimension: int = 2,
    clockwise: bool = False,
    center=None,
) -> Curve:
    n_folds = int(n_folds)
    radius = float(radius)
    if n_folds < 1:
        raise ValidationError(f"n_folds must be >= 1, got {n_folds}")
    if radius <= 0:
        raise ValidationError(f"radius must be positive, got {radius}")
    sign = -1.0 if clockwise else 1.0
    c = np.zeros(int(dimension)) if center is None else _pad(np.asarray(center, dtype=float), int(dimension))

    def func(ts):
        ts = np.asarray(ts, dtype=float)
        a = sign * ts / radius
        pts = radius * np.stack([np.cos(a), np.sin(a)], axis=-1)
        vel = sign * np.stack([-np.sin(a), np.cos(a)], axis=-1)
        return _pad(pts, int(dimension)) + c, _pad(vel, int(dimension))

    period = 2.0 * math.pi * radius * n_folds
    params = {"n_folds": n_folds, "radius": radius, "dimension": int(dimension), "clockwise": bool(clockwise)}
    return analytic_curve("circle_multi", func, 0.0, period, samples, True, params, arclength=True)


@register_curve("circle")
def _circle(samples: int, **params) -> Curve:
    return _circle_multi(samples, **params)


@register_curve("ellipse")
def _ellipse(samples: int, a: float = 2.0, b: float = 1.0, dimension: int = 2) -> Curve:
    a, b = float(a), float(b)
    if a <= 0 or b <= 0:
        raise ValidationError("ellipse semi-axes must be positive")

    def func(ts):
        ts = np.asarray(ts, dtype=float)
        pts = np.stack([a * np.cos(ts), b * np.sin(ts)], axis=-1)
        vel = np.stack([-a * np.sin(ts), b * np.cos(ts)], axis=-1)
        return _pad(pts, int(dimension)), _pad(vel, int(dimension))

    return analytic_curve("ellipse", func, 0.0, 2.0 * math.pi, samples, True, {"a": a, "b": b, "dimension": int(dimension)})


@register_curve("tilted_ellipse")
def _tilted_ellipse(samples: int, a: float = 1.5, b: float = 1.0, tilt: float = 0.4) -> Curve:
    a, b, tilt = float(a), float(b), float(tilt)
    rot = np.array([[1.0, 0.0, 0.0], [0.0, math.cos(tilt), -math.sin(tilt)], [0.0, math.sin(tilt), math.cos(tilt)]])

    def func(ts):
        ts = np.asarray(ts, dtype=float)
        z = np.zeros_like(ts)
        pts = np.stack([a * np.cos(ts), b * np.sin(ts), z], axis=-1) @ rot.T
        vel = np.stack([-a * np.sin(ts), b * np.cos(ts), z], axis=-1) @ rot.T
        return pts, vel

    return analytic_curve("tilted_ellipse", func, 0.0, 2.0 * math.pi, samples, True, {"a": a, "b": b, "tilt": tilt})


@register_curve("helix")
def _helix(samples: int, c: float = 1.0, turns: float = 1.0) -> Curve:
    c = float(c)
    w = math.sqrt(1.0 + c * c)

    def func(ts):
        u = np.asarray(ts, dtype=float) / w
        pts = np.stack([np.cos(u), np.sin(u), c * u], axis=-1)
        vel = np.stack([-np.sin(u), np.cos(u), np.full_like(u, c)], axis=-1) / w
        return pts, vel

    return analytic_curve("helix", func, 0.0, 2.0 * math.pi * w * float(turns), samples, False, {"c": c, "turns": float(turns)}, arclength=True)


@register_curve("lemniscate")
def _lemniscate(samples: int, scale: float = 1.0) -> Curve:
    scale = float(scale)

    def func(ts):
        ts = np.asarray(ts, dtype=float)
        pts = scale * np.stack([np.sin(ts), np.sin(ts) * np.cos(ts)], axis=-1)
        vel = scale * np.stack([np.cos(ts), np.cos(2 * ts)], axis=-1)
        return pts, vel

    return analytic_curve("lemniscate", func, 0.0, 2.0 * math.pi, samples, True, {"scale": scale})


@register_curve("trefoil")
def _trefoil(samples: int, scale: float = 1.0) -> Curve:
    scale = float(scale)

    def func(ts):
        ts = np.asarray(ts, dtype=float)
        pts = np.stack([np.sin(ts) + 2 * np.sin(2 * ts), np.cos(ts) - 2 * np.cos(2 * ts), -np.sin(3 * ts)], axis=-1)
        vel = np.stack([np.cos(ts) + 4 * np.cos(2 * ts), -np.sin(ts) + 4 * np.sin(2 * ts), -3 * np.cos(3 * ts)], axis=-1)
        return scale * pts, scale * vel

    return analytic_curve("trefoil", func, 0.0, 2.0 * math.pi, samples, True, {"scale": scale})


@register_curve("space_wave")
def _space_wave(samples: int, h: float = 0.3) -> Curve:
    h = float(h)

    def func(ts):
        ts = np.asarray(ts, dtype=float)
        pts = np.stack([np.cos(ts), np.sin(ts), h * np.sin(2 * ts)], axis=-1)
        vel = np.stack([-np.sin(ts), np.cos(ts), 2 * h * np.cos(2 * ts)], axis=-1)
        return pts, vel

    return analytic_curve("space_wave", func, 0.0, 2.0 * math.pi, samples, True, {"h": h})


@register_curve("random_fourier")
def _random_fourier(samples: int, seed: int = 0, modes: int = 4, dimension: int = 2, amplitude: float = 0.15) -> Curve:
    """Seeded smooth closed front: unit circle plus decaying random harmonics."""
    rng = np.random.default_rng(int(seed))
    dimension = int(dimension)
    ks = np.arange(2, int(modes) + 1)
    a = rng.normal(size=(len(ks), dimension)) * float(amplitude) / ks[:, None] ** 2
    b = rng.normal(size=(len(ks), dimension)) * float(amplitude) / ks[:, None] ** 2
    if dimension > 2:
        tilt = rng.normal(size=dimension - 2) * float(amplitude)
    else:
        tilt = np.zeros(0)

    def func(ts):
        ts = np.asarray(ts, dtype=float)
        base = np.stack([np.cos(ts), np.sin(ts)], axis=-1)
        dbase = np.stack([-np.sin(ts), np.cos(ts)], axis=-1)
        pts = _pad(base, dimension)
        vel = _pad(dbase, dimension)
        if dimension > 2:
            pts = pts + np.cos(ts)[..., None] * _pad_front(tilt, dimension)
            vel = vel - np.sin(ts)[..., None] * _pad_front(tilt, dimension)
        arg = np.multiply.outer(ts, ks)
        pts = pts + np.cos(arg) @ a + np.sin(arg) @ b
        vel = vel + (-np.sin(arg) * ks) @ a + (np.cos(arg) * ks) @ b
        return pts, vel

    params = {"seed": int(seed), "modes": int(modes), "dimension": dimension, "amplitude": float(amplitude)}
    return analytic_curve("random_fourier", func, 0.0, 2.0 * math.pi, samples, True, params)


def _pad_front(tail: np.ndarray, dimension: int) -> np.ndarray:
    out = np.zeros(dimension)
    out[2:] = tail
    return out


# ----------------------------------------------------------------------
# length and reparametrization
# ----------------------------------------------------------------------
def _interval_lengths(c: Curve, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Gauss-Legendre arclength of each parameter interval [a_i, b_i]."""
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    nodes = mid[:, None] + half[:, None] * _GAUSS_NODES[None, :]
    _, vel = c.evaluate(nodes)
    speed = np.linalg.norm(vel, axis=-1)
    return half * (speed @ _GAUSS_WEIGHTS)


def curve_length(c: Curve) -> float:
    """Total arclength over the sampled window."""
    return float(np.sum(_interval_lengths(c, c.t[:-1], c.t[1:])))


class _ArclengthMap:
    """Inverse of s(t) for a curve, vectorized Newton on Gauss-Legendre arclength."""

    def __init__(self, curve: Curve):
        self.curve = curve
        pieces = _interval_lengths(curve, curve.t[:-1], curve.t[1:])
        if np.any(pieces <= 1e-14 * max(1.0, float(np.sum(pieces)))):
            raise ValidationError("degenerate curve: near-zero length over a sample gap")
        nodes = curve.t[:-1, None] + 0.5 * (curve.t[1:, None] - curve.t[:-1, None]) * (_GAUSS_NODES[None, :] + 1.0)
        speed = np.linalg.norm(curve.evaluate(nodes)[1], axis=-1)
        if np.min(speed) <= 1e-10 * float(np.max(speed)):
            raise ValidationError("degenerate curve: near-zero speed inside a sample gap")
        self.cumulative = np.concatenate([[0.0], np.cumsum(pieces)])
        self.length = float(self.cumulative[-1])

    def parameter_at(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        c = self.curve
        turns = np.zeros_like(s)
        if c.closed:
            turns = np.floor(s / self.length)
            s = s - turns * self.length
        idx = np.clip(np.searchsorted(self.cumulative, s, side="right") - 1, 0, len(c.t) - 2)
        ta = c.t[idx]
        tb = c.t[idx + 1]
        base = self.cumulative[idx]
        frac = (s - base) / (self.cumulative[idx + 1] - base)
        t = ta + frac * (tb - ta)
        flat_t = t.ravel()
        flat_a = ta.ravel()
        flat_target = (s - base).ravel()
        for _ in range(12):
            partial = _interval_lengths(c, flat_a, flat_t)
            speed = np.linalg.norm(c.evaluate(flat_t)[1], axis=-1)
            step = (partial - flat_target) / speed
            flat_t = flat_t - step
            if np.max(np.abs(step)) < 1e-15 * max(1.0, c.span):
                break
        t = flat_t.reshape(s.shape)
        if c.closed:
            t = t + turns * c.period
        return t


def resample_arclength(c: Curve, m: int) -> Curve:
    """Reparametrize by arclength from 0 with m distinct samples (unit speed)."""
    m = int(m)
    if m < settings.MIN_CLOSED_SAMPLES:
        raise ValidationError(f"resample count must be >= {settings.MIN_CLOSED_SAMPLES}, got {m}")
    amap = _ArclengthMap(c)
    length = amap.length
    if c.closed:
        s = np.linspace(0.0, length, m + 1)
    else:
        s = np.linspace(0.0, length, m)

    def evaluator(ss):
        ss = np.asarray(ss, dtype=float)
        tt = amap.parameter_at(ss)
        pts, vel = c.evaluate(tt)
        speed = np.linalg.norm(vel, axis=-1, keepdims=True)
        return pts, vel / speed

    pts, _ = evaluator(s)
    out = Curve(
        t=s,
        points=pts,
        closed=c.closed,
        period=length if c.closed else None,
        analytic_id=c.analytic_id,
        params=dict(c.params),
        evaluator=evaluator,
        arclength=True,
    )
    logger.debug(f"[Curves] arclength resample: length={length:.12g} samples={m}")
    return out


# ----------------------------------------------------------------------
# Frenet frame
# ----------------------------------------------------------------------
def _require_arclength(c: Curve):
    if c.arclength:
        return
    speed = np.linalg.norm(c.sample_velocities(), axis=1)
    if np.max(np.abs(speed - 1.0)) > 1e-6:
        raise ValidationError("Curve is not arclength parametrized; call resample_arclength first")


def frenet_data(c: Curve) -> FrenetData:
    """Frenet frame, curvature and torsion from centered 4th-order stencils on arclength samples."""
    _require_arclength(c)
    h = c.spacing
    n_dim = c.dimension
    if c.closed:
        base = c.points[:-1]
        padded = np.concatenate([base[-3:], base, base[:3]], axis=0)
        s = c.t[:-1]
    else:
        ghost_lo, _ = c.evaluate(c.t0 - h * np.array([3.0, 2.0, 1.0]))
        ghost_hi, _ = c.evaluate(c.t1 + h * np.array([1.0, 2.0, 3.0]))
        padded = np.concatenate([ghost_lo, c.points, ghost_hi], axis=0)
        s = c.t
    d1, d2, d3 = _centered_derivatives(padded, h)
    speed = np.linalg.norm(d1, axis=1)
    tangent = d1 / speed[:, None]
    kappa_floor = settings.TORSION_THRESHOLD_FACTOR / h

    if n_dim == 2:
        kappa = (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) / speed**3
        normal = np.column_stack([-tangent[:, 1], tangent[:, 0]])
        return FrenetData(s=s, tangent=tangent, normal=normal, curvature=kappa, spacing=h, closed=c.closed)

    if n_dim == 3:
        cross = np.cross(d1, d2)
        cross_norm = np.linalg.norm(cross, axis=1)
        kappa = cross_norm / speed**3
        available = kappa >= kappa_floor
        safe = np.where(available, cross_norm, 1.0)
        binormal = np.where(available[:, None], cross / safe[:, None], np.nan)
        normal = np.cross(binormal, tangent)
        torsion = np.where(available, np.einsum("ij,ij->i", cross, d3) / safe**2, np.nan)
        if not np.all(available):
            logger.warning(f"[Curves] torsion unavailable at {int(np.sum(~available))} samples (kappa < {kappa_floor:.3e})")
        return FrenetData(
            s=s,
            tangent=tangent,
            normal=normal,
            curvature=kappa,
            spacing=h,
            closed=c.closed,
            binormal=binormal,
            torsion=torsion,
            torsion_available=available,
        )

    accel = d2 - np.einsum("ij,ij->i", d2, tangent)[:, None] * tangent
    accel_norm = np.linalg.norm(accel, axis=1)
    kappa = accel_norm / speed**2
    safe = np.where(accel_norm > 0, accel_norm, 1.0)
    normal = np.where((kappa >= kappa_floor)[:, None], accel / safe[:, None], np.nan)
    return FrenetData(s=s, tangent=tangent, normal=normal, curvature=kappa, spacing=h, closed=c.closed)


def signed_planar_area(c: Curve) -> float:
    """½∮ det(Γ, Γ̇) dt over one period."""
    if c.dimension != 2:
        raise ValidationError(f"signed area needs a planar curve, got n={c.dimension}")
    if not c.closed:
        raise ValidationError("signed area needs a closed curve")
    pts = c.points[:-1]
    vel = c.sample_velocities()[:-1]
    integrand = pts[:, 0] * vel[:, 1] - pts[:, 1] * vel[:, 0]
    if c.is_uniform:
        return float(0.5 * np.sum(integrand) * c.spacing)
    full = np.append(integrand, integrand[0])
    return float(0.5 * integrate.trapezoid(full, c.t))


# ----------------------------------------------------------------------
# CSV interface
# ----------------------------------------------------------------------
def curve_metadata(c: Curve) -> Dict[str, Any]:
    return {
        "dimension": c.dimension,
        "closed": bool(c.closed),
        "period": c.period,
        "analytic_id": c.analytic_id,
    }


def save_curve_csv(c: Curve, path) -> Path:
    """Write `t,x1..xn` rows plus a JSON metadata sidecar next to it."""
    from utils.export import write_atomic_text, format_float

    path = Path(path)
    header = ",".join(["t"] + [f"x{i + 1}" for i in range(c.dimension)])
    rows = [header]
    for t, p in zip(c.t, c.points):
        rows.append(",".join(format_float(v) for v in (t, *p)))
    write_atomic_text(path, "\n".join(rows) + "\n")
    write_atomic_text(path.with_suffix(".json"), json.dumps(curve_metadata(c), sort_keys=True, indent=2) + "\n")
    return path


def load_curve_csv(path) -> Curve:
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"curve file not found: {path}")
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as exc:
        raise ValidationError(f"malformed curve file {path}: {exc}") from exc
    header = path.read_text(encoding="utf-8").splitlines()[0].split(",")
    if header[0] != "t" or len(header) != data.shape[1]:
        raise ValidationError(f"malformed curve header in {path}: {header}")
    meta: Dict[str, Any] = {}
    sidecar = path.with_suffix(".json")
    if sidecar.exists():
        meta = json.loads(sidecar.read_text(encoding="utf-8"))
    closed = bool(meta.get("closed", False))
    return Curve(
        t=data[:, 0],
        points=data[:, 1:],
        closed=closed,
        period=meta.get("period") if closed else None,
        analytic_id=meta.get("analytic_id"),
    )
