# utils/correspondence.py
"""
Bicycle correspondence between curves.

Goals:
- Glide reflections and Darboux butterflies as plain point operations.
- Build 2ℓ-partners of a front from the bicycle flow and verify any pair of
  curves claimed to be in correspondence (chord, midpoint tangency, glide).
- The Γ_{k,n} family: exact closed form, rotation numbers, Zindler checks,
  the partner-rotation shift law and the spherical partners for λ > 1.

Bike lengths ℓ are used throughout; the chord between partners is 2ℓ.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from server.conf import settings
from utils.bike_dynamics import _check_ell, integrate_bicycle_sphere
from utils.curves import Curve, analytic_curve, curve_length, register_curve, resample_arclength
from utils.errors import NumericalDiagnosticError, ValidationError
from utils.moebius_monodromy import classify, fixed_points, monodromy_element

logger = logging.getLogger(__name__)


# ----------------------------------------------------------------------
# point geometry
# ----------------------------------------------------------------------
def _reflect_about_line(x: np.ndarray, base: np.ndarray, direction: np.ndarray) -> np.ndarray:
    """Reflection x ↦ 2P(x) − x in the line base + s·direction (direction unit)."""
    rel = x - base
    along = np.einsum("...i,...i->...", rel, direction)[..., None] * direction
    return base + 2.0 * along - rel


def glide_reflect(U, V, x) -> np.ndarray:
    """Reflect x in the line UV, then translate by V − U."""
    U = np.asarray(U, dtype=float)
    V = np.asarray(V, dtype=float)
    x = np.asarray(x, dtype=float)
    d = V - U
    norm = float(np.linalg.norm(d))
    if norm == 0.0:
        raise ValidationError("glide reflection needs U != V")
    return _reflect_about_line(x, U, d / norm) + d


@dataclass(frozen=True, eq=False)
class Butterfly:
    """A parallelogram folded about the diagonal AC."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    degenerate: bool = False

    @property
    def vertices(self) -> np.ndarray:
        return np.stack([self.A, self.B, self.C, self.D])

    def side_residual(self) -> float:
        ab = np.linalg.norm(self.A - self.B)
        cd = np.linalg.norm(self.C - self.D)
        bc = np.linalg.norm(self.B - self.C)
        ad = np.linalg.norm(self.A - self.D)
        return float(max(abs(ab - cd), abs(bc - ad)))

    def planarity_residual(self) -> float:
        """Smallest singular value beyond the second of the edge vectors (0 for a planar quad)."""
        edges = np.stack([self.B - self.A, self.C - self.A, self.D - self.A])
        sing = np.linalg.svd(edges, compute_uv=False)
        return float(sing[2]) if len(sing) > 2 else 0.0


def butterfly_complete(A, B, C, axis_hint=None) -> Butterfly:
    """
    Complete A, B, C to a Darboux butterfly: D is A − B + C reflected in line AC.

    When A and C coincide the fold axis is undetermined; an `axis_hint`
    direction (e.g. the axis at a neighbouring time) is used instead and
    the result is flagged degenerate.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    C = np.asarray(C, dtype=float)
    diag = C - A
    scale = max(1.0, float(np.max(np.abs(np.stack([A, B, C])))))
    norm = float(np.linalg.norm(diag))
    degenerate = norm < settings.COLLINEAR_TOL * scale
    if degenerate:
        if axis_hint is None:
            raise ValidationError("butterfly completion is undetermined: A = C and no fold axis given")
        axis = np.asarray(axis_hint, dtype=float)
        axis = axis / np.linalg.norm(axis)
        logger.warning("[Correspondence] degenerate butterfly (A = C); folding about the hinted axis")
    else:
        axis = diag / norm
    D = _reflect_about_line(A - B + C, A, axis)
    return Butterfly(A=A, B=B, C=C, D=D, degenerate=degenerate)


def _butterfly_points(A: np.ndarray, B: np.ndarray, C: np.ndarray):
    diag = C - A
    norm = np.linalg.norm(diag, axis=-1)
    scale = max(1.0, float(np.max(np.abs(np.concatenate([A, B, C])))))
    bad = norm < settings.COLLINEAR_TOL * scale
    return diag, norm, bad


def _butterfly_velocity(A, B, C, dA, dB, dC):
    """Ḋ for D = A + 2(w·u)u − w with w = C − B and u the unit diagonal."""
    e = C - A
    de = dC - dA
    elen = np.linalg.norm(e, axis=-1, keepdims=True)
    u = e / elen
    du = (de - np.einsum("ij,ij->i", de, u)[:, None] * u) / elen
    w = C - B
    dw = dC - dB
    wu = np.einsum("ij,ij->i", w, u)[:, None]
    dwu = (np.einsum("ij,ij->i", dw, u) + np.einsum("ij,ij->i", w, du))[:, None]
    return dA + 2.0 * (dwu * u + wu * du) - dw


def butterfly_map(ell: float, lam: float, z):
    """
    Direction map of the λ-bikes across a 2ℓ butterfly, in the frame where
    Γ₂ − Γ₁ = 2ℓ on the positive real axis: w = −(ℓz̄ − λ)/(λz̄ − ℓ).
    """
    zb = np.conj(np.asarray(z, dtype=complex))
    return -(ell * zb - lam) / (lam * zb - ell)


# ----------------------------------------------------------------------
# partners and verification
# ----------------------------------------------------------------------
def _same_grid(c1: Curve, c2: Curve):
    if len(c1.t) != len(c2.t) or not np.allclose(c1.t, c2.t, rtol=0.0, atol=1e-10 * max(1.0, c1.span)):
        raise ValidationError(f"grid mismatch: curves have {len(c1.t)} and {len(c2.t)} samples on different parameters")
    if c1.dimension != c2.dimension:
        raise ValidationError(f"dimension mismatch: {c1.dimension} vs {c2.dimension}")


def bicycle_partner(front: Curve, ell: float, r0, t0=None, t1=None, steps=None) -> Curve:
    """Γ + 2ℓr along the solution r of the ℓ-bicycle equation from r0 (closed if it closes)."""
    ell = _check_ell(ell)
    traj = integrate_bicycle_sphere(front, ell, r0, t0, t1, steps=steps)
    r = traj.r
    v = traj.front_velocity
    points = traj.front_points + 2.0 * ell * r
    tangents = -v + 2.0 * np.einsum("ij,ij->i", v, r)[:, None] * r
    scale = max(1.0, float(np.max(np.abs(points))))
    gap = float(np.linalg.norm(points[-1] - points[0]))
    closed = bool(front.closed and abs(traj.t[-1] - traj.t[0] - front.period) < 1e-9 * front.period and gap <= 1e-6 * scale)
    logger.info(f"[Correspondence] partner ell={ell:g} closed={closed} endpoint gap={gap:.3e}")
    return Curve(
        t=traj.t,
        points=points,
        closed=closed,
        period=front.period if closed else None,
        params={"partner_of": front.analytic_id, "ell": ell},
        tangents=tangents,
    )


@dataclass(frozen=True)
class CorrespondenceResiduals:
    chord: float
    angle: float
    glide: float
    length_gap: float
    two_ell: float

    def passed(self, tol: float = settings.BIKEGEO_TOL) -> bool:
        return max(self.chord, self.angle, self.glide) < tol

    def to_dict(self) -> Dict[str, float]:
        return {
            "two_ell": self.two_ell,
            "chord": self.chord,
            "angle": self.angle,
            "glide": self.glide,
            "length_gap": self.length_gap,
        }


def _line_angle(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Angle between the lines spanned by a and b (rows), in [0, π/2]."""
    dot = np.abs(np.einsum("ij,ij->i", a, b))
    cross2 = np.einsum("ij,ij->i", a, a) * np.einsum("ij,ij->i", b, b) - dot**2
    return np.arctan2(np.sqrt(np.maximum(cross2, 0.0)), dot)


def verify_correspondence(c1: Curve, c2: Curve, two_ell: float) -> CorrespondenceResiduals:
    """
    Residuals of the 2ℓ-correspondence between two curves on one grid:
    chord-length deviation, angle between Γ₁ − Γ₂ and Γ̇₁ + Γ̇₂, and the
    glide identity Γ̇₂ = reflection of Γ̇₁ in the chord.
    """
    _same_grid(c1, c2)
    two_ell = float(two_ell)
    if two_ell <= 0:
        raise ValidationError(f"two_ell must be positive, got {two_ell}")
    chord = c1.points - c2.points
    lengths = np.linalg.norm(chord, axis=1)
    chord_res = float(np.max(np.abs(lengths - two_ell)))

    v1 = c1.sample_velocities()
    v2 = c2.sample_velocities()
    mid = v1 + v2
    scale = max(float(np.max(np.linalg.norm(v1, axis=1))), 1e-300)
    moving = np.linalg.norm(mid, axis=1) > 1e-9 * scale
    angle = float(np.max(_line_angle(chord[moving], mid[moving]), initial=0.0))

    safe = np.where(lengths > 0, lengths, 1.0)
    u = chord / safe[:, None]
    reflected = 2.0 * np.einsum("ij,ij->i", v1, u)[:, None] * u - v1
    glide = float(np.max(np.linalg.norm(v2 - reflected, axis=1)) / scale)

    gap = abs(curve_length(c1) - curve_length(c2))
    res = CorrespondenceResiduals(chord=chord_res, angle=angle, glide=glide, length_gap=gap, two_ell=two_ell)
    logger.debug(f"[Correspondence] residuals {res.to_dict()}")
    return res


@dataclass(frozen=True, eq=False)
class BianchiReport:
    D: Curve
    ad: CorrespondenceResiduals
    cd: CorrespondenceResiduals
    planarity: float
    degenerate_samples: List[int]
    butterfly_map_residual: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "AD": self.ad.to_dict(),
            "CD": self.cd.to_dict(),
            "planarity": self.planarity,
            "degenerate_samples": self.degenerate_samples,
            "butterfly_map_residual": self.butterfly_map_residual,
        }


def bianchi_check(A: Curve, B: Curve, C: Curve, ell1: float, ell2: float) -> BianchiReport:
    """
    Complete A(t)B(t)C(t) to butterflies and check the fourth curve D.

    |A − B| = 2ℓ₁ and |B − C| = 2ℓ₂ on input; (A, D) should then be in
    2ℓ₂- and (C, D) in 2ℓ₁-correspondence. Samples where A = C are filled
    by interpolation from the neighbours and reported.
    """
    ell1 = _check_ell(ell1)
    ell2 = _check_ell(ell2)
    if ell1 == ell2:
        raise ValidationError("bianchi_check needs ell1 != ell2")
    _same_grid(A, B)
    _same_grid(B, C)
    pa, pb, pc = A.points, B.points, C.points
    diag, norm, bad = _butterfly_points(pa, pb, pc)
    if np.all(bad):
        raise ValidationError("every butterfly is degenerate (A = C throughout)")
    safe = np.where(bad, 1.0, norm)
    u = diag / safe[:, None]
    D = _reflect_about_line(pa - pb + pc, pa, u)
    va, vb, vc = A.sample_velocities(), B.sample_velocities(), C.sample_velocities()
    dD = np.zeros_like(D)
    good = ~bad
    dD[good] = _butterfly_velocity(pa[good], pb[good], pc[good], va[good], vb[good], vc[good])
    degenerate = [int(i) for i in np.flatnonzero(bad)]
    if degenerate:
        logger.warning(f"[Correspondence] {len(degenerate)} degenerate butterflies interpolated")
        idx = np.flatnonzero(good)
        for k in range(D.shape[1]):
            D[bad, k] = np.interp(np.flatnonzero(bad), idx, D[good, k])
            dD[bad, k] = np.interp(np.flatnonzero(bad), idx, dD[good, k])

    closed = bool(A.closed and C.closed and np.linalg.norm(D[-1] - D[0]) <= 1e-6 * max(1.0, float(np.max(np.abs(D)))))
    d_curve = Curve(t=A.t, points=D, closed=closed, period=A.period if closed else None, tangents=dD)

    planarity = 0.0
    if A.dimension > 2:
        for i in range(len(D)):
            edges = np.stack([pb[i] - pa[i], pc[i] - pa[i], D[i] - pa[i]])
            planarity = max(planarity, float(np.linalg.svd(edges, compute_uv=False)[2]))

    map_res = None
    if A.dimension == 2:
        # B → C is the 2ℓ₂ chord; A and D carry the ℓ₁-bike directions
        chord = (pc - pb) / (2.0 * ell2)
        rot = chord[:, 0] - 1j * chord[:, 1]
        z = ((pa - pb)[:, 0] + 1j * (pa - pb)[:, 1]) * rot / (2.0 * ell1)
        w = ((D - pc)[:, 0] + 1j * (D - pc)[:, 1]) * rot / (2.0 * ell1)
        map_res = float(np.max(np.abs(butterfly_map(ell2, ell1, z) - w)))

    report = BianchiReport(
        D=d_curve,
        ad=verify_correspondence(A, d_curve, 2.0 * ell2),
        cd=verify_correspondence(C, d_curve, 2.0 * ell1),
        planarity=planarity,
        degenerate_samples=degenerate,
        butterfly_map_residual=map_res,
    )
    logger.info(f"[Correspondence] Bianchi AD chord={report.ad.chord:.2e} CD chord={report.cd.chord:.2e}")
    return report


def monodromy_conjugacy_check(c1: Curve, c2: Curve, lambda_list: Sequence[float], steps=None) -> List[Dict[str, Any]]:
    """Trace table of the λ-monodromies of two closed curves (equal traces for partners)."""
    if not (c1.closed and c2.closed):
        raise ValidationError("monodromy comparison needs closed curves")
    if c1.dimension != c2.dimension:
        raise ValidationError(f"dimension mismatch: {c1.dimension} vs {c2.dimension}")
    rows = []
    for lam in lambda_list:
        e1 = monodromy_element(c1, lam, steps=steps)
        e2 = monodromy_element(c2, lam, steps=steps)
        tr1 = float(np.trace(e1.matrix))
        tr2 = float(np.trace(e2.matrix))
        row: Dict[str, Any] = {
            "lambda": float(lam),
            "trace_1": tr1,
            "trace_2": tr2,
            "relative_error": abs(tr1 - tr2) / max(1.0, abs(tr1)),
        }
        if e1.reduction is not None:
            s1 = complex(np.trace(e1.reduction))
            s2 = complex(np.trace(e2.reduction))
            # SL₂ traces are defined up to sign
            row["sl2_error"] = min(abs(s1 - s2), abs(s1 + s2)) / max(1.0, abs(s1))
        rows.append(row)
        logger.info(f"[Correspondence] lambda={lam:g} traces {tr1:.12g} / {tr2:.12g}")
    return rows


# ----------------------------------------------------------------------
# the Γ_{k,n} family
# ----------------------------------------------------------------------
def ell_kn(k: int, n: int) -> float:
    """ℓ_{k,n} = 1/√(1 − (k/n)²): the λ at which the n-fold circle has trivial monodromy."""
    k, n = int(k), int(n)
    if not 1 <= k < n:
        raise ValidationError(f"need 1 <= k < n, got k={k}, n={n}")
    return 1.0 / math.sqrt(1.0 - (k / n) ** 2)


@dataclass(frozen=True)
class GammaKN:
    """
    Closed-form 2ℓ-partner of the unit circle: Γ(t) = e^{it}(1 + 2ℓe^{iφ(t)})
    with tan(φ/2) = −a·tan(bt/2), φ continuous and φ(0) = 0.
    """

    k: int
    n: int
    ell: float = field(init=False)
    a: float = field(init=False)
    b: float = field(init=False)

    def __post_init__(self):
        k, n = int(self.k), int(self.n)
        if not 1 <= k < n:
            raise ValidationError(f"gamma_kn needs 1 <= k < n, got k={k}, n={n}")
        if math.gcd(k, n) != 1:
            raise ValidationError(f"gamma_kn needs coprime k, n (got gcd {math.gcd(k, n)}); reduce the pair first")
        b = k / n
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "ell", 1.0 / math.sqrt(1.0 - b * b))
        object.__setattr__(self, "a", 1.0 / b + math.sqrt(1.0 / b**2 - 1.0))

    @property
    def period(self) -> float:
        return 2.0 * math.pi * self.n

    def phi(self, ts) -> np.ndarray:
        s = 0.5 * self.b * np.asarray(ts, dtype=float)
        j = np.round(s / math.pi)
        sp = s - j * math.pi
        return -2.0 * (np.arctan2(self.a * np.sin(sp), np.cos(sp)) + j * math.pi)

    def phi_rate(self, ts) -> np.ndarray:
        s = 0.5 * self.b * np.asarray(ts, dtype=float)
        return -self.a * self.b / (np.cos(s) ** 2 + (self.a * np.sin(s)) ** 2)

    def complex_points(self, ts) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        return np.exp(1j * ts) * (1.0 + 2.0 * self.ell * np.exp(1j * self.phi(ts)))

    def __call__(self, ts):
        ts = np.asarray(ts, dtype=float)
        z = self.complex_points(ts)
        # unit speed: Γ̇ = −i e^{i(t + 2φ)}
        dz = -1j * np.exp(1j * (ts + 2.0 * self.phi(ts)))
        return np.stack([z.real, z.imag], axis=-1), np.stack([dz.real, dz.imag], axis=-1)


def gamma_kn(k: int, n: int, samples: int = settings.BIKEGEO_SAMPLES) -> Curve:
    """Γ_{k,n} sampled over its period 2πn (already unit speed)."""
    g = GammaKN(k, n)
    params = {"k": g.k, "n": g.n, "ell": g.ell, "a": g.a, "b": g.b}
    curve = analytic_curve("gamma_kn", g, 0.0, g.period, int(samples), True, params, arclength=True)
    logger.debug(f"[Correspondence] gamma_kn k={k} n={n} ell={g.ell:.12g}")
    return curve


@register_curve("gamma_kn")
def _gamma_kn_builder(samples: int, k: int = 1, n: int = 2) -> Curve:
    return gamma_kn(k, n, samples)


# ----------------------------------------------------------------------
# rotation numbers and Zindler curves
# ----------------------------------------------------------------------
def _lift(rho: float, k: int, n: int) -> float:
    """
    f(ρ) = arctan((n/k)·tan(kπρ))/(nπ) + j/n on the branch j = round(kρ).

    f is continuous and increasing with f(0) = 0, f(1) = k/n; solutions are
    the points where n(ρ − f(ρ)) is an integer.
    """
    j = math.floor(k * rho + 0.5)
    x = k * math.pi * rho - j * math.pi
    if abs(abs(x) - 0.5 * math.pi) < 1e-15:
        core = math.copysign(0.5 * math.pi, x)
    else:
        core = math.atan((n / k) * math.tan(x))
    return core / (n * math.pi) + j / n


def _rotation_residual(rho: float, k: int, n: int) -> float:
    return n * math.sin(k * math.pi * rho) * math.cos(n * math.pi * rho) - k * math.cos(k * math.pi * rho) * math.sin(n * math.pi * rho)


def _rotation_residual_slope(rho: float, k: int, n: int) -> float:
    return (n * n - k * k) * math.pi * math.sin(k * math.pi * rho) * math.sin(n * math.pi * rho)


def rotation_numbers(k: int, n: int) -> List[float]:
    """
    The n − k − 1 solutions ρ ∈ (0, 1) of n·tan(kπρ) = k·tan(nπρ), sorted.

    Each root is the unique solution of n(ρ − f(ρ)) = m for m = 1..n−k−1,
    found by bisection and polished by Newton on the pole-free form
    n sin(kπρ)cos(nπρ) − k cos(kπρ)sin(nπρ).

    Pairs outside 1 <= k <= n−2 with gcd(k, n) = 1 have no admissible
    rotation number: the result is empty (and logged).
    """
    k, n = int(k), int(n)
    if k < 1 or k > n - 2 or math.gcd(k, n) != 1:
        logger.warning(f"[Zindler] no rotation numbers for (k, n) = ({k}, {n}): need 1 <= k <= n-2 and gcd(k, n) = 1")
        return []
    roots = []
    for m in range(1, n - k):
        lo, hi = 0.0, 1.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if n * (mid - _lift(mid, k, n)) < m:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-15:
                break
        rho = 0.5 * (lo + hi)
        for _ in range(3):
            slope = _rotation_residual_slope(rho, k, n)
            if slope == 0.0:
                break
            step = _rotation_residual(rho, k, n) / slope
            if abs(step) > 1e-9:
                break
            rho -= step
        roots.append(rho)
    worst = max((abs(_rotation_residual(r, k, n)) for r in roots), default=0.0)
    logger.debug(f"[Zindler] k={k} n={n} roots={roots} residual={worst:.2e}")
    if worst > 1e-10:
        raise NumericalDiagnosticError(f"[Zindler] rotation numbers for ({k}, {n}) did not converge ({worst:.2e})")
    return roots


def rotation_number_table(n_max: int) -> List[Dict[str, Any]]:
    """One record per rotation number of every coprime (k, n), 1 <= k <= n−2, n <= n_max."""
    rows = []
    for n in range(3, int(n_max) + 1):
        for k in range(1, n - 1):
            if math.gcd(k, n) != 1:
                continue
            for i, rho in enumerate(rotation_numbers(k, n)):
                tan2 = math.tan(math.pi * rho) ** 2 if abs(rho - 0.5) > 1e-12 else float("inf")
                rows.append({"k": k, "n": n, "index": i, "rho": rho, "tan2": tan2})
    return rows


@dataclass(frozen=True)
class ZindlerCertificate:
    rotation_number: float
    chord_length: float
    chord_deviation: float
    angle_residual: float
    tolerance: float
    passed: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "rho": self.rotation_number,
            "chord": self.chord_length,
            "chord_deviation": self.chord_deviation,
            "angle_residual": self.angle_residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def zindler_verify(c: Curve, rho: float, tol: Optional[float] = None, samples: Optional[int] = None) -> ZindlerCertificate:
    """
    Check that the chord spanning arclength ρL has constant length and is
    parallel to the velocity of its midpoint, over a full period.
    """
    if not c.closed:
        raise ValidationError("zindler_verify needs a closed curve")
    rho = float(rho)
    if not 0.0 < rho < 1.0:
        raise ValidationError(f"rotation number must lie in (0, 1), got {rho}")
    arc = c if c.arclength else resample_arclength(c, c.sample_count)
    L = arc.period
    m = arc.sample_count if samples is None else int(samples)
    s = arc.t0 + L * np.arange(m) / m
    p0, v0 = arc.evaluate(s)
    p1, v1 = arc.evaluate(s + rho * L)
    chord = p1 - p0
    lengths = np.linalg.norm(chord, axis=1)
    mean = float(np.mean(lengths))
    deviation = float(np.max(np.abs(lengths - mean)))
    angle = float(np.max(_line_angle(chord, v0 + v1)))
    scale = float(np.max(np.linalg.norm(arc.points - arc.points.mean(axis=0), axis=1)))
    tol = settings.ZINDLER_TOL if tol is None else float(tol)
    passed = deviation < tol * max(1.0, scale) and angle < tol
    logger.info(f"[Zindler] rho={rho:.12g} chord={mean:.12g} dev={deviation:.2e} angle={angle:.2e} passed={passed}")
    return ZindlerCertificate(
        rotation_number=rho,
        chord_length=mean,
        chord_deviation=deviation,
        angle_residual=angle,
        tolerance=tol,
        passed=passed,
    )


def zindler_family_report(k: int, n: int, samples: int = settings.BIKEGEO_SAMPLES) -> Dict[str, Any]:
    """Rotation numbers of Γ_{k,n} with a certificate for each."""
    curve = gamma_kn(k, n, samples)
    rhos = rotation_numbers(k, n)
    certs = [zindler_verify(curve, rho) for rho in rhos]
    return {
        "k": int(k),
        "n": int(n),
        "rho": rhos,
        "chord": [cert.chord_length for cert in certs],
        "residuals": [{"chord": cert.chord_deviation, "angle": cert.angle_residual} for cert in certs],
        "passed": all(cert.passed for cert in certs) and bool(certs),
    }


def shift_law_check(k: int, n: int, lam: float, samples: int = settings.BIKEGEO_SAMPLES) -> Dict[str, float]:
    """
    The 2λ-partner of Γ_{k,n} built by butterflies over (e^{i(t+γ)}, e^{it}, Γ_{k,n})
    is e^{−iχ}Γ_{k,n}(t + τ) with tan(bτ/2) = b·tan(γ/2), χ = τ − γ, λ = sin(γ/2).
    """
    lam = float(lam)
    if not 0.0 < lam <= 1.0:
        raise ValidationError(f"shift law holds for 0 < lambda <= 1, got {lam}")
    g = GammaKN(k, n)
    gamma = 2.0 * math.asin(lam)
    tau = 2.0 * math.atan(g.b * math.tan(0.5 * gamma)) / g.b if gamma < math.pi else math.pi / g.b
    chi = tau - gamma
    ts = np.linspace(0.0, g.period, int(samples), endpoint=False)
    A = np.exp(1j * (ts + gamma))
    B = np.exp(1j * ts)
    C = g.complex_points(ts)

    def planar(z):
        return np.stack([z.real, z.imag], axis=-1)

    diag = planar(C - A)
    u = diag / np.linalg.norm(diag, axis=1, keepdims=True)
    D = _reflect_about_line(planar(A - B + C), planar(A), u)
    predicted = planar(np.exp(-1j * chi) * g.complex_points(ts + tau))
    residual = float(np.max(np.linalg.norm(D - predicted, axis=1)))
    logger.info(f"[Zindler] shift law k={k} n={n} lambda={lam:g} tau={tau:.12g} chi={chi:.12g} residual={residual:.2e}")
    return {"k": int(k), "n": int(n), "lambda": lam, "gamma": gamma, "tau": tau, "chi": chi, "residual": residual}


def partner_sphere_fit(k: int, n: int, lam: float, samples: int = settings.BIKEGEO_SAMPLES, steps=None) -> Dict[str, Any]:
    """
    The closed 2λ-partner (λ > 1) of Γ_{k,n} in R³ and its best sphere with
    center on the z-axis. Trivial monodromy (λ = ℓ_{k′,n}) gives the planar
    partner through (1 + 2ℓ_{k,n} + 2λ, 0, 0).
    """
    lam = _check_ell(lam)
    if lam <= 1.0:
        raise ValidationError(f"spherical partners need lambda > 1, got {lam}")
    curve = gamma_kn(k, n, samples).embedded(3)
    element = monodromy_element(curve, lam, steps=steps)
    cls = classify(element)
    if cls == "trivial":
        r0 = np.array([1.0, 0.0, 0.0])
    else:
        fps = fixed_points(element)
        if not fps:
            raise NumericalDiagnosticError(f"[Zindler] no fixed direction for lambda={lam:g} (class {cls})")
        r0 = max(fps, key=lambda r: r[2])
    partner = bicycle_partner(curve, lam, r0, steps=steps)
    pts = partner.points
    # |p|² = 2 z z₀ + (R² − z₀²)
    design = np.column_stack([2.0 * pts[:, 2], np.ones(len(pts))])
    target = np.einsum("ij,ij->i", pts, pts)
    (z0, c), *_ = np.linalg.lstsq(design, target, rcond=None)
    radius = math.sqrt(max(c + z0 * z0, 0.0))
    dist = np.linalg.norm(pts - np.array([0.0, 0.0, z0]), axis=1)
    residual = float(np.max(np.abs(dist - radius)))
    z_extent = float(np.ptp(pts[:, 2]))
    planar = z_extent < 1e-6
    logger.info(f"[Zindler] partner lambda={lam:g} class={cls} sphere residual={residual:.2e} z-extent={z_extent:.2e}")
    return {
        "k": int(k),
        "n": int(n),
        "lambda": lam,
        "class": cls,
        "center_z": float(z0),
        "radius": radius,
        "sphere_residual": residual,
        "z_extent": z_extent,
        "planar": planar,
        "closed": partner.closed,
    }
