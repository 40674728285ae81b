# utils/moebius_monodromy.py
"""
Group-level view of the bicycle monodromy.

Goals:
- Pass between SO⁺(n,1) and SL₂ (R for n = 2, C for n = 3) through the
  Hermitian-matrix model of R^{n,1}: x ↦ ρ(x), acting by g ρ g*.
- Classify, find fixed points and derivatives in the chart z = (r₂+ir₃)/(1+r₁),
  where g = [[a, b], [c, d]] acts as z ↦ (c + dz)/(a + bz).
- Check the derivative formula M′ = exp(−L/ℓ + iΩ) against numbers computed
  without the group structure (perturbed sphere flows, spherical areas).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate

from server.conf import settings
from utils.bike_dynamics import (
    LorentzMatrix,
    _check_ell,
    _default_steps,
    _window,
    integrate_bicycle_sphere,
    lorentz_lift_flow,
    lorentz_lift_monodromy,
)
from utils.curves import Curve, signed_planar_area
from utils.errors import NumericalDiagnosticError, ValidationError
from utils.integrators import FlowResult, magnus_flow, rk4_flow, signature_matrix

logger = logging.getLogger(__name__)

CLASSES = ("hyperbolic", "parabolic", "elliptic", "trivial")
MONODROMY_MAX_STEP = 0.005


# ----------------------------------------------------------------------
# the Hermitian model of R^{n,1}
# ----------------------------------------------------------------------
def hermitian_of(x: np.ndarray, n: int) -> np.ndarray:
    """ρ(x): null vectors (r, 1) map to rank-one matrices ζζ* with z = ζ₂/ζ₁."""
    x = np.asarray(x, dtype=float)
    if n == 3:
        return 0.5 * np.array(
            [[x[3] + x[0], x[1] - 1j * x[2]], [x[1] + 1j * x[2], x[3] - x[0]]],
        )
    if n == 2:
        return 0.5 * np.array([[x[2] + x[0], x[1]], [x[1], x[2] - x[0]]])
    raise ValidationError(f"the Hermitian model exists for n in (2, 3), got n={n}")


def vector_of(h: np.ndarray, n: int) -> np.ndarray:
    """Inverse of hermitian_of."""
    if n == 3:
        return np.array([(h[0, 0] - h[1, 1]).real, 2 * h[1, 0].real, 2 * h[1, 0].imag, (h[0, 0] + h[1, 1]).real])
    if n == 2:
        return np.array([h[0, 0] - h[1, 1], 2 * h[1, 0], h[0, 0] + h[1, 1]]).real
    raise ValidationError(f"the Hermitian model exists for n in (2, 3), got n={n}")


def _adjoint_action(g: np.ndarray, h: np.ndarray, n: int) -> np.ndarray:
    return g @ h @ (g.conj().T if n == 3 else g.T)


def lorentz_from_reduction(g, n: Optional[int] = None) -> np.ndarray:
    """SO⁺(n,1) matrix of g ∈ SL₂: column k is ρ⁻¹(g ρ(e_k) g*)."""
    g = np.asarray(g)
    if g.shape != (2, 2):
        raise ValidationError(f"reduction must be 2x2, got {g.shape}")
    if n is None:
        n = 2 if np.isrealobj(g) else 3
    cols = []
    for k in range(n + 1):
        e = np.zeros(n + 1)
        e[k] = 1.0
        cols.append(vector_of(_adjoint_action(g, hermitian_of(e, n), n), n))
    return np.column_stack(cols)


def _adjugate(g: np.ndarray) -> np.ndarray:
    return np.array([[g[1, 1], -g[0, 1]], [-g[1, 0], g[0, 0]]])


def _normalize_sign(g: np.ndarray) -> np.ndarray:
    flat = g.ravel()
    k = int(np.argmax(np.abs(flat)))
    lead = flat[k]
    if lead.real < 0 or (lead.real == 0 and np.imag(lead) < 0):
        return -g
    return g


def _solve_reduction(m: np.ndarray, n: int) -> np.ndarray:
    """Null vector of the real-linear system g ρ(e_k) = ρ(M e_k) adj(g)* over k."""
    complex_case = n == 3
    unknowns = 8 if complex_case else 4
    blocks = [(hermitian_of(np.eye(n + 1)[k], n), hermitian_of(m[:, k], n)) for k in range(n + 1)]

    def residual(u: np.ndarray) -> np.ndarray:
        g = (u[0::2] + 1j * u[1::2]).reshape(2, 2) if complex_case else u.reshape(2, 2)
        adj = _adjugate(g)
        adj = adj.conj().T if complex_case else adj.T
        parts = [(g @ rho - h @ adj).ravel() for rho, h in blocks]
        flat = np.concatenate(parts)
        return np.concatenate([flat.real, flat.imag]) if complex_case else flat.real

    system = np.column_stack([residual(np.eye(unknowns)[j]) for j in range(unknowns)])
    try:
        _, sing, vt = np.linalg.svd(system)
    except np.linalg.LinAlgError as exc:
        raise NumericalDiagnosticError(f"[Monodromy] SL2 reduction: {exc}") from exc
    u = vt[-1]
    g = (u[0::2] + 1j * u[1::2]).reshape(2, 2) if complex_case else u.reshape(2, 2)
    det = np.linalg.det(g)
    # a unit-norm kernel vector has |det| ≈ 1/|g|² ≈ 1/|M|, so the test is relative to |M|
    scale = max(1.0, float(np.max(np.abs(m))))
    if abs(det) * scale < 1e-8:
        raise NumericalDiagnosticError(f"[Monodromy] degenerate SL2 reduction (det={abs(det):.3e}, |M|={scale:.3e})")
    g = g / np.sqrt(det + 0j) if complex_case else g / math.sqrt(abs(det))
    if not complex_case:
        g = g.real
    return _normalize_sign(g)


# ----------------------------------------------------------------------
# monodromy elements
# ----------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class MonodromyElement:
    lorentz: LorentzMatrix
    reduction: Optional[np.ndarray]
    dimension: int
    ell: float

    @property
    def matrix(self) -> np.ndarray:
        return self.lorentz.matrix

    @property
    def reduction_residual(self) -> float:
        if self.reduction is None:
            return 0.0
        back = lorentz_from_reduction(self.reduction, self.dimension)
        return float(np.max(np.abs(back - self.matrix)) / max(1.0, float(np.max(np.abs(self.matrix)))))

    @property
    def trace(self) -> complex:
        if self.reduction is not None:
            tr = complex(np.trace(self.reduction))
            return tr.real if self.dimension == 2 else tr
        return float(np.trace(self.matrix))


def _as_lorentz(m) -> LorentzMatrix:
    if isinstance(m, LorentzMatrix):
        return m
    return LorentzMatrix(matrix=np.asarray(m, dtype=float), ell=float("nan"), t0=0.0, t1=0.0)


def moebius_from_lorentz(m: Union[LorentzMatrix, np.ndarray], ell: Optional[float] = None) -> MonodromyElement:
    """
    Attach the SL₂ reduction (n = 2, 3) to a Lorentz matrix.

    The reduction is the least-squares null vector of the adjoint-action
    system, scaled to det 1 and sign-normalized (largest entry has positive
    real part). Other dimensions carry no reduction.
    """
    lor = _as_lorentz(m)
    mat = lor.matrix
    n = lor.n
    if not np.all(np.isfinite(mat)):
        raise NumericalDiagnosticError("[Monodromy] Lorentz matrix has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(mat)))) ** 2
    metric = signature_matrix(n)
    defect = float(np.max(np.abs(mat.T @ metric @ mat - metric)))
    if defect > 1e-6 * scale:
        raise ValidationError(f"matrix is not in O(n,1): |MᵀJM − J| = {defect:.3e}")
    if mat[n, n] <= 0:
        raise ValidationError("matrix does not preserve time orientation (M[n,n] <= 0)")
    reduction = _solve_reduction(mat, n) if n in (2, 3) else None
    el = MonodromyElement(lorentz=lor, reduction=reduction, dimension=n, ell=float(lor.ell if ell is None else ell))
    if reduction is not None and el.reduction_residual > 1e-6:
        raise NumericalDiagnosticError(f"[Monodromy] reduction does not reproduce the Lorentz matrix ({el.reduction_residual:.3e})")
    return el


def monodromy_steps(front: Curve, ell: float, t0=None, t1=None) -> int:
    """Default step count for monodromy matrices: at most MONODROMY_MAX_STEP and ℓ/20 per step."""
    a, b = _window(front, t0, t1)
    base = _default_steps(front, a, b, None)
    h = min(MONODROMY_MAX_STEP, ell / 20.0)
    return max(base, int(math.ceil(abs(b - a) / h)))


def reduction_generator(velocity: np.ndarray, ell: float) -> np.ndarray:
    """
    sl₂ generators −(1/2ℓ)·ρ̂(v) of the bicycle flow, ρ̂(v) = v₁σ₃ + v₂σ₁ (+ v₃σ₂).

    g′ = X g covers the Lorentz lift: g ρ(x) g* then moves by the boost
    −(1/ℓ)[[0, v], [vᵀ, 0]]. Real for planar fronts, complex for n = 3.
    """
    v = np.atleast_2d(velocity)
    n = v.shape[1]
    if n not in (2, 3):
        raise ValidationError(f"SL2 generators exist for n in (2, 3), got n={n}")
    out = np.zeros((len(v), 2, 2), dtype=complex if n == 3 else float)
    off = v[:, 1] - 1j * v[:, 2] if n == 3 else v[:, 1]
    out[:, 0, 0] = v[:, 0]
    out[:, 1, 1] = -v[:, 0]
    out[:, 0, 1] = off
    out[:, 1, 0] = np.conj(off) if n == 3 else off
    return -out / (2.0 * ell)


def reduction_flow(front: Curve, ell: float, t0=None, t1=None, steps: Optional[int] = None) -> FlowResult:
    """SL₂ path of the bicycle flow from the identity, by exponential steps."""
    ell = _check_ell(ell)
    a, b = _window(front, t0, t1)
    steps = monodromy_steps(front, ell, t0, t1) if steps is None else int(steps)
    dim = 3 if front.dimension == 3 else 2
    eye = np.eye(2, dtype=complex if dim == 3 else float)
    return magnus_flow(lambda ts: reduction_generator(front.velocity(ts), ell), eye, a, b, steps)


def monodromy_element(front: Curve, ell: float, t0=None, t1=None, steps: Optional[int] = None) -> MonodromyElement:
    """
    Lorentz lift over one period (or the whole window) and its SL₂ reduction.

    For n = 2, 3 the reduction is integrated on its own in SL₂ and must
    reproduce the lift through the adjoint action (relative residual
    below 1e−6); recovering it from a large hyperbolic Lorentz matrix is
    ill conditioned.
    """
    ell = _check_ell(ell)
    steps = monodromy_steps(front, ell, t0, t1) if steps is None else int(steps)
    lift = lorentz_lift_monodromy(front, ell, t0, t1, steps=steps)
    if front.dimension not in (2, 3):
        return moebius_from_lorentz(lift, ell)
    g = reduction_flow(front, ell, t0, t1, steps=steps).final
    det = complex(np.linalg.det(g))
    g = g / np.sqrt(det) if front.dimension == 3 else (g / math.sqrt(abs(det))).real
    el = MonodromyElement(lorentz=lift, reduction=_normalize_sign(g), dimension=front.dimension, ell=ell)
    if el.reduction_residual > 1e-6:
        raise NumericalDiagnosticError(f"[Monodromy] SL2 path does not reproduce the Lorentz lift ({el.reduction_residual:.3e})")
    logger.debug(f"[Monodromy] ell={ell:g} |M|={np.max(np.abs(lift.matrix)):.3e} reduction residual={el.reduction_residual:.2e}")
    return el


def _lorentz_of(element) -> np.ndarray:
    if isinstance(element, MonodromyElement):
        return element.matrix
    if isinstance(element, LorentzMatrix):
        return element.matrix
    return np.asarray(element, dtype=float)


def act_on_sphere(element, r) -> np.ndarray:
    """Projective action on directions (the null cone) and on Klein-ball points."""
    mat = _lorentz_of(element)
    n = mat.shape[0] - 1
    r = np.asarray(r, dtype=float)
    x = np.concatenate([r, np.ones(r.shape[:-1] + (1,))], axis=-1)
    y = x @ mat.T
    return y[..., :n] / y[..., n : n + 1]


def mobius_chart_map(g: np.ndarray, z):
    """Action of g on the chart coordinate z = ζ₂/ζ₁."""
    return (g[1, 0] + g[1, 1] * z) / (g[0, 0] + g[0, 1] * z)


# ----------------------------------------------------------------------
# classification
# ----------------------------------------------------------------------
def _classify_sl2(g: np.ndarray, n: int) -> Tuple[str, bool]:
    eye = np.eye(2)
    if min(np.max(np.abs(g - eye)), np.max(np.abs(g + eye))) < settings.TRIVIAL_TOL:
        return "trivial", False
    t = complex(np.trace(g))
    band = settings.PARABOLIC_BAND * max(1.0, float(np.linalg.norm(g)))
    gap = min(abs(t - 2), abs(t + 2))
    if gap < band:
        # inside the band the integrator cannot tell the classes apart
        return "parabolic", gap > 0.1 * band
    if n == 2:
        return ("hyperbolic" if abs(t.real) > 2 else "elliptic"), False
    if abs(t.imag) < band and abs(t.real) < 2:
        return "elliptic", False
    return "hyperbolic", False


def _classify_lorentz(m: np.ndarray) -> Tuple[str, bool]:
    n = m.shape[0] - 1
    if np.max(np.abs(m - np.eye(n + 1))) < settings.TRIVIAL_TOL:
        return "trivial", False
    vals, vecs = np.linalg.eig(m)
    radius = float(np.max(np.abs(vals)))
    if radius > 1 + 1e3 * settings.PARABOLIC_BAND:
        return "hyperbolic", False
    metric = signature_matrix(n)
    for k, lam in enumerate(vals):
        if abs(lam - 1) < 1e-6:
            x = np.real_if_close(vecs[:, k])
            if np.isrealobj(x) and float(x @ metric @ x) < -1e-6:
                return "elliptic", False
    return "parabolic", radius > 1 + settings.PARABOLIC_BAND


def classify(element: MonodromyElement, with_flag: bool = False):
    """Monodromy class; with_flag=True also returns the tolerance-ambiguity flag."""
    if element.reduction is not None:
        cls, flag = _classify_sl2(element.reduction, element.dimension)
    else:
        cls, flag = _classify_lorentz(element.matrix)
    if flag:
        logger.warning(f"[Monodromy] trace within the parabolic band; class {cls} is tolerance-ambiguous")
    logger.info(f"[Monodromy] n={element.dimension} ell={element.ell:g} class={cls}")
    return (cls, flag) if with_flag else cls


# ----------------------------------------------------------------------
# fixed points and derivatives
# ----------------------------------------------------------------------
def _spinor_to_direction(zeta: np.ndarray, n: int) -> np.ndarray:
    z1, z2 = zeta
    norm = abs(z1) ** 2 + abs(z2) ** 2
    cross = np.conj(z1) * z2
    r = np.array([abs(z1) ** 2 - abs(z2) ** 2, 2 * cross.real, 2 * cross.imag]) / norm
    return r[:n]


def _direction_to_spinor(r: np.ndarray) -> np.ndarray:
    r1 = r[0]
    q = complex(r[1], r[2] if len(r) > 2 else 0.0)
    if r1 >= 0:
        a = math.sqrt((1 + r1) / 2)
        return np.array([a, q / (2 * a)])
    b = math.sqrt((1 - r1) / 2)
    return np.array([np.conj(q) / (2 * b), b])


def inverse_lorentz(element) -> np.ndarray:
    """M⁻¹ = J Mᵀ J, exact on SO⁺(n,1) and free of the conditioning of a solve."""
    mat = _lorentz_of(element)
    metric = signature_matrix(mat.shape[0] - 1)
    return metric @ mat.T @ metric


def fixed_point_residual(element, r) -> float:
    """
    How far r is from being fixed, measured with whichever of M, M⁻¹ does not
    expand near r: an error δ at a repelling point comes back as δ·|M′| under
    M but as δ/|M′| under M⁻¹.
    """
    r = np.asarray(r, dtype=float)
    forward = float(np.max(np.abs(act_on_sphere(element, r) - r)))
    backward = float(np.max(np.abs(act_on_sphere(inverse_lorentz(element), r) - r)))
    return min(forward, backward)


def _polish_spinor(g: np.ndarray, zeta: np.ndarray) -> np.ndarray:
    """One Newton step on the fixed-point quadratic in the better-conditioned chart."""
    a, b, c, d = g.ravel()
    scale = max(1.0, float(np.max(np.abs(g))))
    if abs(zeta[0]) >= abs(zeta[1]):
        # z = ζ₂/ζ₁ solves b z² + (a − d) z − c = 0
        z = zeta[1] / zeta[0]
        slope = 2 * b * z + (a - d)
        if abs(slope) > 1e-8 * scale:
            z = z - (b * z * z + (a - d) * z - c) / slope
        return np.array([1.0, z])
    # w = ζ₁/ζ₂ solves c w² + (d − a) w − b = 0
    w = zeta[0] / zeta[1]
    slope = 2 * c * w + (d - a)
    if abs(slope) > 1e-8 * scale:
        w = w - (c * w * w + (d - a) * w - b) / slope
    return np.array([w, 1.0])


def _eigenvalue_pair(g: np.ndarray) -> Tuple[complex, complex]:
    """Eigenvalues μ, 1/μ of g ∈ SL₂ with |μ| >= 1, the small one taken from det = 1."""
    t = complex(np.trace(g))
    s = np.sqrt(t * t - 4.0 + 0j)
    big = 0.5 * (t + s) if abs(t + s) >= abs(t - s) else 0.5 * (t - s)
    return big, 1.0 / big


def fixed_points(element: MonodromyElement) -> List[np.ndarray]:
    """
    Fixed directions on S^{n−1} (n = 2, 3), from the eigenvectors of the reduction.

    Elliptic n = 2 elements have none; trivial elements fix everything and
    return an empty list (logged).
    """
    if element.reduction is None:
        raise ValidationError(f"fixed points are computed for n in (2, 3), got n={element.dimension}")
    cls = classify(element)
    n = element.dimension
    g = element.reduction
    if cls == "trivial":
        logger.warning("[Monodromy] trivial monodromy: every direction is fixed")
        return []
    if cls == "elliptic" and n == 2:
        return []
    if cls == "parabolic":
        nil = g - 0.5 * np.trace(g) * np.eye(2)
        col = nil[:, int(np.argmax(np.linalg.norm(nil, axis=0)))]
        spinors = [col]
    else:
        _, vecs = np.linalg.eig(g)
        spinors = [vecs[:, 0], vecs[:, 1]]
    out = []
    for zeta in spinors:
        zeta = _polish_spinor(g, zeta / zeta[np.argmax(np.abs(zeta))])
        if n == 2:
            zeta = np.real_if_close(zeta, tol=1e6).real
        out.append(_spinor_to_direction(zeta, n))
    for r in out:
        res = fixed_point_residual(element, r)
        if res > 1e-6:
            logger.warning(f"[Monodromy] fixed point residual {res:.2e}")
    return out


def derivative_at_fixed_point(element: MonodromyElement, fp, tol: float = 1e-6):
    """
    Derivative of the monodromy at a fixed point: 1/μ² with gζ = μζ for the
    spinor ζ of fp (equivalently 1/(a + bz*)² in the chart).

    fp must pass fixed_point_residual < tol; μ is the eigenvalue of g nearest
    the Rayleigh quotient at fp, so repelling points keep full precision.
    """
    if element.reduction is None:
        raise ValidationError(f"derivatives are computed for n in (2, 3), got n={element.dimension}")
    fp = np.asarray(fp, dtype=float)
    res = fixed_point_residual(element, fp)
    if res > tol:
        raise ValidationError(f"point is not fixed by the monodromy (residual {res:.3e})")
    zeta = _direction_to_spinor(fp)
    g = element.reduction
    estimate = complex(np.vdot(zeta, g @ zeta) / np.vdot(zeta, zeta))
    # the quotient loses |g|·eps absolutely; snap to the nearer exact eigenvalue
    mu = min(_eigenvalue_pair(g), key=lambda value: abs(value - estimate))
    out = 1.0 / mu**2
    return float(out.real) if element.dimension == 2 else out


# ----------------------------------------------------------------------
# derivatives of the monodromy map by finite differences
# ----------------------------------------------------------------------
def _perturbation_field(ell: float):
    def field(v, y):
        r = y[0]
        d = y[1:]
        vr = float(r @ v)
        out = np.empty_like(y)
        out[0] = (-v + vr * r) / ell
        # F(r + d) − F(r) expanded exactly
        out[1:] = ((d @ v)[:, None] * (r + d) + vr * d) / ell
        return out

    return field


def tangent_basis(r: np.ndarray) -> np.ndarray:
    """Orthonormal basis of T_r S^{n−1} (rows); for n = 3 ordered so e_a × e_b = r."""
    r = np.asarray(r, dtype=float)
    n = len(r)
    if n == 2:
        return np.array([[-r[1], r[0]]])
    q, _ = np.linalg.qr(np.column_stack([r, np.eye(n)]))
    basis = q[:, 1:n].T
    basis = basis - (basis @ r)[:, None] * r
    basis = basis / np.linalg.norm(basis, axis=1, keepdims=True)
    if n == 3 and float(np.cross(basis[0], basis[1]) @ r) < 0:
        basis = basis[::-1]
    return basis


def monodromy_jacobian_fd(front: Curve, ell: float, r0, basis=None, h: float = 1e-4, t0=None, t1=None, steps=None):
    """
    Central-difference Jacobian of the time-[t0, t1] flow map at r0.

    Perturbed directions cos(h)r0 ± sin(h)e are carried as exact differences
    from the base trajectory, so contraction does not cost precision.
    Returns (final base direction, image vectors (k, n) of the basis rows).
    """
    ell = _check_ell(ell)
    r0 = np.asarray(r0, dtype=float)
    basis = tangent_basis(r0) if basis is None else np.atleast_2d(basis)
    a, b = _window(front, t0, t1)
    steps = _default_steps(front, a, b, steps)
    shift = -2.0 * math.sin(h / 2) ** 2
    d0 = []
    for e in basis:
        d0.append(shift * r0 + math.sin(h) * e)
        d0.append(shift * r0 - math.sin(h) * e)
    y0 = np.vstack([r0[None, :], np.array(d0)])
    flow = rk4_flow(_perturbation_field(ell), front.velocity, y0, a, b, steps)
    final = flow.final
    images = (final[1::2] - final[2::2]) / (2.0 * math.sin(h))
    return final[0], images


def monodromy_derivative_fd(front: Curve, ell: float, fp, h: float = 1e-4, backward: bool = False, steps=None):
    """
    Derivative of the period map at a fixed point by finite differences.

    Complex for n = 3 (in the basis e_a, e_b with e_a × e_b = fp), real for
    n = 2. With backward=True the inverse map is differenced and inverted,
    which keeps repelling points well conditioned.
    """
    fp = np.asarray(fp, dtype=float)
    basis = tangent_basis(fp)
    a, b = _window(front, None, None)
    if backward:
        a, b = b, a
    _, images = monodromy_jacobian_fd(front, ell, fp, basis, h, a, b, steps)
    jac = images @ basis.T  # row k: image of e_k in the basis
    if len(fp) == 2:
        val = float(jac[0, 0])
        return 1.0 / val if backward else val
    val = complex(jac[0, 0], jac[0, 1])
    return 1.0 / val if backward else val


# ----------------------------------------------------------------------
# rear length and spherical area
# ----------------------------------------------------------------------
def signed_rear_length(front: Curve, r_traj, t=None) -> float:
    """L_γ = −∫ r·v dt over the trajectory's grid (a BikeTrajectory or samples on front.t)."""
    if hasattr(r_traj, "front_velocity"):
        ts = np.asarray(r_traj.t)
        r = np.asarray(r_traj.r)
        v = np.asarray(r_traj.front_velocity)
    else:
        r = np.asarray(r_traj, dtype=float)
        ts = front.t if t is None else np.asarray(t, dtype=float)
        if r.shape[0] != len(ts):
            raise ValidationError(f"grid mismatch: {r.shape[0]} directions for {len(ts)} parameters")
        v = front.velocity(ts)
    if r.ndim != 2:
        raise ValidationError("signed_rear_length expects one trajectory of shape (m, n)")
    integrand = -np.einsum("ij,ij->i", r, v)
    return float(integrate.trapezoid(integrand, ts))


def _pick_pole(path: np.ndarray) -> np.ndarray:
    n = path.shape[1]
    candidates = [np.eye(n)[i] for i in range(n)] + [-np.eye(n)[i] for i in range(n)]
    mean = path.mean(axis=0)
    if np.linalg.norm(mean) > 1e-8:
        candidates.insert(0, mean / np.linalg.norm(mean))
    best = max(candidates, key=lambda p: float(np.min(np.linalg.norm(path + p, axis=1))))
    return best


def _reduce_area(area: float) -> float:
    x = math.fmod(area, 4 * math.pi)
    if x < 0:
        x += 4 * math.pi
    if x > 2 * math.pi:
        x -= 4 * math.pi
    return x


def spherical_signed_area(r_path, tangents=None, t=None, reduce: bool = True, pole=None) -> float:
    """
    Algebraic area enclosed by a closed path on S² (left of the path, seen from outside).

    Without tangents the path is a geodesic polygon and the area is a sum of
    signed triangles against a pole; with tangents (and parameters t) the
    pole 1-form P·(r × ṙ)/(1 + P·r) is integrated instead. reduce=True
    returns the value in (−2π, 2π].
    """
    path = np.asarray(r_path, dtype=float)
    if path.ndim != 2 or path.shape[1] != 3:
        raise ValidationError(f"spherical area needs a path of shape (m, 3), got {path.shape}")
    if np.linalg.norm(path[-1] - path[0]) > 1e-6:
        raise ValidationError(f"path is not closed (gap {np.linalg.norm(path[-1] - path[0]):.3e})")
    p = _pick_pole(path) if pole is None else np.asarray(pole, dtype=float)
    if float(np.min(np.linalg.norm(path + p, axis=1))) < 1e-6:
        p = _pick_pole(path)
    if tangents is not None:
        tangents = np.asarray(tangents, dtype=float)
        ts = np.arange(len(path), dtype=float) if t is None else np.asarray(t, dtype=float)
        integrand = np.cross(path, tangents) @ p / (1.0 + path @ p)
        area = float(integrate.trapezoid(integrand, ts))
    else:
        a = path
        b = np.roll(path, -1, axis=0)
        num = np.einsum("ij,ij->i", np.cross(a, b), np.broadcast_to(p, a.shape))
        den = 1.0 + a @ p + b @ p + np.einsum("ij,ij->i", a, b)
        area = float(np.sum(2.0 * np.arctan2(num, den)))
    return _reduce_area(area) if reduce else area


# ----------------------------------------------------------------------
# parallel transport along a direction path
# ----------------------------------------------------------------------
def _transport_once(path: np.ndarray, w: np.ndarray) -> np.ndarray:
    w = np.array(w, dtype=float)
    norms = np.linalg.norm(w, axis=-1, keepdims=True)
    for r in path[1:]:
        w = w - (w @ r)[..., None] * r
        w = w * (norms / np.linalg.norm(w, axis=-1, keepdims=True))
    return w


def parallel_transport(path, vectors, levels: int = 3) -> np.ndarray:
    """
    Levi-Civita transport of tangent vectors along a sampled path on S^{n−1}.

    Each step projects onto the next tangent space and restores the length
    (first order); levels > 1 Richardson-extrapolates over step doubling.
    """
    path = np.asarray(path, dtype=float)
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
    stride = 2 ** (levels - 1)
    if (len(path) - 1) % stride != 0:
        levels = 1
    estimates = [_transport_once(path[:: 2**k], vectors) for k in range(levels)]
    # estimates[k] has step 2^k h; eliminate h, h² in turn
    for order in range(1, levels):
        factor = 2.0**order
        estimates = [(factor * estimates[k] - estimates[k + 1]) / (factor - 1.0) for k in range(len(estimates) - 1)]
    return estimates[0]


@dataclass(frozen=True)
class TransportReport:
    r0: np.ndarray
    rear_length: float
    jacobian: np.ndarray
    predicted: np.ndarray
    residual: float

    def to_dict(self) -> Dict[str, Any]:
        return {"r0": self.r0, "rear_length": self.rear_length, "residual": self.residual}


def transport_check(front: Curve, ell: float, r0, t0=None, t1=None, steps=None, h: float = 1e-4) -> TransportReport:
    """dM(r₀) = e^{−L/ℓ}·P along r(t), for any n, any r₀ and open or closed fronts."""
    ell = _check_ell(ell)
    r0 = np.asarray(r0, dtype=float)
    a, b = _window(front, t0, t1)
    steps = _default_steps(front, a, b, steps)
    steps += (-steps) % 4
    traj = integrate_bicycle_sphere(front, ell, r0, a, b, steps=steps)
    basis = tangent_basis(r0)
    _, images = monodromy_jacobian_fd(front, ell, r0, basis, h, a, b, steps)
    rear = signed_rear_length(front, traj)
    predicted = math.exp(-rear / ell) * parallel_transport(traj.r, basis)
    residual = float(np.max(np.linalg.norm(images - predicted, axis=1)) / max(1e-300, float(np.max(np.linalg.norm(predicted, axis=1)))))
    logger.debug(f"[Berry] transport check L={rear:.6g} residual={residual:.2e}")
    return TransportReport(r0=r0, rear_length=rear, jacobian=images, predicted=predicted, residual=residual)


# ----------------------------------------------------------------------
# the derivative (Berry phase) formula
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class FixedPointRecord:
    r: np.ndarray
    derivative: complex
    mobius_derivative: complex
    predicted: complex
    rear_length: float
    berry_area: Optional[float]
    berry_area_continuous: Optional[float]
    residual: float
    attracting: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "r": self.r,
            "derivative": self.derivative,
            "mobius_derivative": self.mobius_derivative,
            "predicted": self.predicted,
            "rear_length": self.rear_length,
            "berry_area": self.berry_area,
            "berry_area_continuous": self.berry_area_continuous,
            "residual": self.residual,
            "attracting": self.attracting,
        }


@dataclass(frozen=True)
class BerryReport:
    ell: float
    dimension: int
    monodromy_class: str
    records: List[FixedPointRecord]

    @property
    def max_residual(self) -> float:
        return max((r.residual for r in self.records), default=0.0)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "ell": self.ell,
            "n": self.dimension,
            "class": self.monodromy_class,
            "max_residual": self.max_residual,
            "fixed_points": [r.to_dict() for r in self.records],
        }


def periodic_direction_path(front: Curve, ell: float, fp, attracting: bool, steps=None):
    """The periodic direction path through a fixed point, integrated in its stable direction."""
    a, b = _window(front, None, None)
    if attracting:
        return integrate_bicycle_sphere(front, ell, fp, a, b, steps=steps)
    back = integrate_bicycle_sphere(front, ell, fp, b, a, steps=steps)
    # reorder onto increasing t
    return type(back)(
        t=back.t[::-1],
        r=back.r[::-1],
        front_points=back.front_points[::-1],
        front_velocity=back.front_velocity[::-1],
        ell=back.ell,
        norm_drift=back.norm_drift,
        error_estimate=back.error_estimate,
    )


def _fixed_point_record(front: Curve, element: MonodromyElement, fp: np.ndarray, steps) -> FixedPointRecord:
    ell = element.ell
    mobius = derivative_at_fixed_point(element, fp)
    attracting = abs(mobius) <= 1.0
    traj = periodic_direction_path(front, ell, fp, attracting, steps=steps)
    rear = signed_rear_length(front, traj)
    fd = monodromy_derivative_fd(front, ell, fp, backward=not attracting, steps=steps)
    if element.dimension == 3:
        omega_c = spherical_signed_area(traj.r, tangents=traj.direction_rates(), t=traj.t, reduce=False)
        omega = _reduce_area(omega_c)
        predicted = complex(np.exp(-rear / ell + 1j * omega))
    else:
        omega = omega_c = None
        predicted = complex(math.exp(-rear / ell))
    residual = abs(fd - predicted) / max(abs(predicted), 1e-300)
    return FixedPointRecord(
        r=fp,
        derivative=complex(fd),
        mobius_derivative=complex(mobius),
        predicted=predicted,
        rear_length=rear,
        berry_area=omega,
        berry_area_continuous=omega_c,
        residual=float(residual),
        attracting=bool(attracting),
    )


def berry_check(front: Curve, ell: float, steps=None) -> BerryReport:
    """
    Both sides of M′(r₀) = exp(−L_γ/ℓ + iΩ) at every fixed point.

    The left side is a finite-difference derivative of the sphere flow; L_γ
    and Ω come from the periodic direction path through the fixed point.
    For n other than 3 the parallel-transport form is checked instead.
    """
    ell = _check_ell(ell)
    if not front.closed:
        raise ValidationError("berry_check needs a closed front")
    if front.dimension not in (2, 3):
        a, _ = _window(front, None, None)
        r0 = np.eye(front.dimension)[0]
        rep = transport_check(front, ell, r0, steps=steps)
        rec = FixedPointRecord(
            r=r0, derivative=complex("nan"), mobius_derivative=complex("nan"), predicted=complex("nan"),
            rear_length=rep.rear_length, berry_area=None, berry_area_continuous=None, residual=rep.residual, attracting=False,
        )
        return BerryReport(ell=ell, dimension=front.dimension, monodromy_class=classify(monodromy_element(front, ell)), records=[rec])
    element = monodromy_element(front, ell, steps=steps)
    cls = classify(element)
    fps = fixed_points(element)
    if not fps:
        raise ValidationError(f"monodromy is {cls} with no isolated fixed point; the derivative formula needs one")
    records = [_fixed_point_record(front, element, fp, steps) for fp in fps]
    report = BerryReport(ell=ell, dimension=front.dimension, monodromy_class=cls, records=records)
    logger.info(f"[Berry] ell={ell:g} class={cls} max residual={report.max_residual:.2e}")
    return report


# ----------------------------------------------------------------------
# reports
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class MonodromyReport:
    dimension: int
    ell: float
    monodromy_class: str
    ambiguous: bool
    trace: complex
    fixed_points: List[np.ndarray]
    derivatives: List[complex]
    rear_lengths: List[float]
    berry_areas: List[Optional[float]]
    residuals: Dict[str, float]
    lorentz: Optional[np.ndarray] = field(default=None, repr=False)
    reduction: Optional[np.ndarray] = field(default=None, repr=False)

    def to_json(self) -> Dict[str, Any]:
        return {
            "n": self.dimension,
            "ell": self.ell,
            "class": self.monodromy_class,
            "ambiguous": self.ambiguous,
            "trace": self.trace,
            "fixed_points": [list(map(float, r)) for r in self.fixed_points],
            "derivatives": self.derivatives,
            "rear_length": self.rear_lengths,
            "berry_area": self.berry_areas,
            "residuals": self.residuals,
        }


def monodromy_report(front: Curve, ell: float, steps=None) -> MonodromyReport:
    """Classification, fixed points, derivatives, rear lengths and Berry areas in one value object."""
    element = monodromy_element(front, ell, steps=steps)
    cls, flag = classify(element, with_flag=True)
    residuals = {
        "J_residual": element.lorentz.j_residual,
        "reduction_residual": element.reduction_residual,
    }
    fps: List[np.ndarray] = []
    derivs: List[complex] = []
    rears: List[float] = []
    areas: List[Optional[float]] = []
    if element.reduction is not None and front.closed:
        fps = fixed_points(element)
        worst_fixed = 0.0
        for fp in fps:
            worst_fixed = max(worst_fixed, fixed_point_residual(element, fp))
            d = derivative_at_fixed_point(element, fp)
            derivs.append(d)
            traj = periodic_direction_path(front, element.ell, fp, abs(d) <= 1.0)
            rears.append(signed_rear_length(front, traj))
            if element.dimension == 3:
                areas.append(spherical_signed_area(traj.r, tangents=traj.direction_rates(), t=traj.t))
            else:
                areas.append(None)
        residuals["fixed_point_residual"] = worst_fixed
        if len(derivs) == 2:
            residuals["derivative_product"] = float(abs(derivs[0] * derivs[1] - 1.0))
    return MonodromyReport(
        dimension=element.dimension,
        ell=element.ell,
        monodromy_class=cls,
        ambiguous=flag,
        trace=element.trace,
        fixed_points=fps,
        derivatives=derivs,
        rear_lengths=rears,
        berry_areas=areas,
        residuals=residuals,
        lorentz=element.matrix,
        reduction=element.reduction,
    )


# ----------------------------------------------------------------------
# planimeter
# ----------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class AreaBivector:
    """𝒜 = ½∫(Γ̇Γᵀ − ΓΓ̇ᵀ)dt; entry (i, j) is minus the signed area of the (i, j) projection."""

    matrix: np.ndarray

    @property
    def dimension(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def axial(self) -> np.ndarray:
        """Â with 𝒜x = Â × x (n = 3)."""
        if self.dimension != 3:
            raise ValidationError("axial vector exists for n = 3 only")
        m = self.matrix
        return np.array([m[2, 1], m[0, 2], m[1, 0]])

    def apply(self, x) -> np.ndarray:
        return self.matrix @ np.asarray(x, dtype=float)


def area_bivector(front: Curve) -> AreaBivector:
    if not front.closed:
        raise ValidationError("the area operator needs a closed front")
    pts = front.points[:-1]
    vel = front.sample_velocities()[:-1]
    outer = np.einsum("ki,kj->kij", vel, pts)
    integrand = 0.5 * (outer - np.transpose(outer, (0, 2, 1)))
    if front.is_uniform:
        mat = integrand.sum(axis=0) * front.spacing
    else:
        full = np.concatenate([integrand, integrand[:1]], axis=0)
        mat = integrate.trapezoid(full, front.t, axis=0)
    return AreaBivector(matrix=mat)


def _slope(eps: np.ndarray, errors: np.ndarray) -> float:
    mask = errors > 0
    if np.sum(mask) < 2:
        return float("inf")
    slope, _ = np.polyfit(np.log(eps[mask]), np.log(errors[mask]), 1)
    return float(slope)


def _check_eps(eps_list) -> np.ndarray:
    eps = np.asarray(list(eps_list), dtype=float)
    if len(eps) < 4:
        raise ValidationError(f"slope fits need at least 4 eps values, got {len(eps)}")
    if np.any(eps <= 0) or np.any(np.diff(eps) >= 0):
        raise ValidationError("eps values must be positive and strictly decreasing")
    return eps


@dataclass(frozen=True)
class PlanimeterReport:
    area: AreaBivector
    r0: np.ndarray
    eps: np.ndarray
    errors: np.ndarray
    slope: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "area_operator": self.area.matrix,
            "r0": self.r0,
            "eps": self.eps,
            "errors": self.errors,
            "slope": self.slope,
        }


def planimeter_check(front: Curve, eps_list, r0=None, steps=None) -> PlanimeterReport:
    """r(L) = r₀ + ε²𝒜r₀ + O(ε³) with ℓ = 1/ε; reports the log-log error slope."""
    eps = _check_eps(eps_list)
    area = area_bivector(front)
    n = front.dimension
    r0 = np.eye(n)[0] if r0 is None else np.asarray(r0, dtype=float)
    predicted_shift = area.apply(r0)
    errors = []
    for e in eps:
        traj = integrate_bicycle_sphere(front, 1.0 / e, r0, steps=steps)
        errors.append(float(np.linalg.norm(traj.final - r0 - e * e * predicted_shift)))
    errors = np.array(errors)
    slope = _slope(eps, errors)
    logger.info(f"[Planimeter] n={n} slope={slope:.3f} errors={errors}")
    return PlanimeterReport(area=area, r0=r0, eps=eps, errors=errors, slope=slope)


def hatchet_angle(front: Curve, ell: float, steps=None) -> Dict[str, float]:
    """
    Rotation angle θ of the (elliptic) planar monodromy and the area estimate ℓ²θ.

    The estimate differs from the enclosed signed area by O(1/ℓ).
    """
    if front.dimension != 2:
        raise ValidationError(f"the hatchet planimeter works in the plane, got n={front.dimension}")
    element = monodromy_element(front, ell, steps=steps)
    g = element.reduction
    if np.trace(g) < 0:
        g = -g
    tr = float(np.trace(g))
    if tr >= 2.0:
        raise ValidationError(f"monodromy is not elliptic (trace {tr:.12g}); no rotation angle")
    theta = 2.0 * math.acos(tr / 2.0) * math.copysign(1.0, g[1, 0] - g[0, 1])
    area = signed_planar_area(front)
    estimate = ell * ell * theta
    return {"ell": float(ell), "angle": theta, "area_estimate": estimate, "signed_area": area, "error": abs(estimate - area)}


def birds_eye_check(front: Curve, eps_list, steps=None) -> Dict[str, Any]:
    """
    |A − Ω| for the planar front scaled to diameter ε, lifted to R³, with ℓ = 1.

    Ω is the spherical area of the periodic path through the upper fixed point.
    """
    if front.dimension != 2 or not front.closed:
        raise ValidationError("birds_eye_check needs a closed planar front")
    eps = _check_eps(eps_list)
    pts = front.points[:-1]
    diffs = pts[:, None, :] - pts[None, :, :]
    diameter = float(np.sqrt(np.max(np.einsum("ijk,ijk->ij", diffs, diffs))))
    errors, areas, omegas = [], [], []
    for e in eps:
        scaled = front.transformed(scale=e / diameter)
        lifted = scaled.embedded(3)
        element = monodromy_element(lifted, 1.0, steps=steps)
        fps = fixed_points(element)
        if not fps:
            raise NumericalDiagnosticError(f"[Berry] no fixed point at eps={e:g}")
        fp = max(fps, key=lambda r: r[2])
        d = derivative_at_fixed_point(element, fp)
        traj = periodic_direction_path(lifted, 1.0, fp, abs(d) <= 1.0, steps=steps)
        omega = spherical_signed_area(traj.r, tangents=traj.direction_rates(), t=traj.t)
        area = signed_planar_area(scaled)
        areas.append(area)
        omegas.append(omega)
        errors.append(abs(area - omega))
    errors = np.array(errors)
    slope = _slope(eps, errors)
    logger.info(f"[Berry] bird's-eye slope={slope:.3f}")
    return {"eps": eps, "area": np.array(areas), "omega": np.array(omegas), "errors": errors, "slope": slope}


# ----------------------------------------------------------------------
# Klein model
# ----------------------------------------------------------------------
def klein_distance(x, y, ell: float = 1.0) -> float:
    """Hyperbolic distance (curvature −1/ℓ²) in the Klein ball from the chord cross-ratio."""
    ell = _check_ell(ell)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.linalg.norm(x) >= 1.0 or np.linalg.norm(y) >= 1.0:
        raise ValidationError("Klein distance needs interior points (|x|, |y| < 1)")
    d = y - x
    dd = float(d @ d)
    if dd == 0.0:
        return 0.0
    # |x + s d|² = 1 at s_minus < 0 < 1 < s_plus
    b = float(x @ d)
    c = float(x @ x) - 1.0
    disc = math.sqrt(b * b - dd * c)
    s_minus = (-b - disc) / dd
    s_plus = (-b + disc) / dd
    ratio = (s_plus * (1.0 - s_minus)) / ((s_plus - 1.0) * (-s_minus))
    return 0.5 * ell * math.log(ratio)


def klein_drift(front: Curve, ell: float, x, y, steps=None) -> float:
    """Maximum change of the Klein distance of two interior points carried by the bicycle flow."""
    flow = lorentz_lift_flow(front, ell, steps=steps)
    d0 = klein_distance(x, y, ell)
    worst = 0.0
    for m in flow.states:
        xt = act_on_sphere(m, x)
        yt = act_on_sphere(m, y)
        worst = max(worst, abs(klein_distance(xt, yt, ell) - d0))
    return worst
