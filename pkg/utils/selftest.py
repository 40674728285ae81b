# utils/selftest.py
"""
Deterministic acceptance suite behind the `selftest` command.

Goals:
- Every gate is a named check returning rows {check, case, value, expected,
  residual, tolerance, passed}; nothing in a row depends on wall-clock time.
- Randomized fronts come from one numpy Generator seeded by the run config.
- Checks run in a fixed order, so two runs with one seed write the same bytes.
"""

from __future__ import annotations

import logging
import math
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from utils import bike_dynamics, correspondence, diffpoly, integrable, moebius_monodromy
from utils.curves import build_curve, resample_arclength
from utils.errors import NUMERICAL_FAILURES, ValidationError, as_numerical_error
from utils.run_config import RunConfig, eps_sweep

logger = logging.getLogger(__name__)

RANDOM_FRONTS = 20
CIRCLE_FOLDS = (1, 2, 3, 4)
CIRCLE_ELLS = ((0.5, "hyperbolic"), (1.0, "parabolic"), (1.5, "elliptic"))

Check = Callable[[RunConfig, np.random.Generator], List[Dict[str, Any]]]
_CHECKS: Dict[str, Check] = {}


def register_check(name: str):
    def decorator(func: Check) -> Check:
        _CHECKS[name] = func
        return func

    return decorator


def check_names() -> List[str]:
    return list(_CHECKS)


def _row(check: str, case: str, value: Any, expected: Any, residual: float, tolerance: float, passed: Optional[bool] = None) -> Dict[str, Any]:
    residual = float(residual)
    if passed is None:
        passed = bool(residual < tolerance)
    return {
        "check": check,
        "case": case,
        "value": value,
        "expected": expected,
        "residual": residual,
        "tolerance": float(tolerance),
        "passed": bool(passed),
    }


def _random_fronts(rng: np.random.Generator, count: int, samples: int, dimension: int = 3) -> list:
    """(seed, front) pairs; the seeds go into the row labels."""
    seeds = [int(s) for s in rng.integers(0, 2**31 - 1, size=count)]
    return [(s, build_curve("random_fourier", samples, seed=s, dimension=dimension)) for s in seeds]


@register_check("monodromy_classes")
def _monodromy_classes(config: RunConfig, rng) -> List[Dict[str, Any]]:
    cases = [(folds, ell, cls) for folds in CIRCLE_FOLDS for ell, cls in CIRCLE_ELLS]
    for folds in CIRCLE_FOLDS:
        for k in range(1, folds):
            if math.gcd(k, folds) == 1:
                cases.append((folds, correspondence.ell_kn(k, folds), "trivial"))
    rows = []
    for folds, ell, expected in cases:
        front = build_curve("circle", config.samples * folds, n_folds=folds)
        element = moebius_monodromy.monodromy_element(front, ell)
        cls = moebius_monodromy.classify(element)
        if expected == "trivial":
            g = element.reduction
            residual = min(np.max(np.abs(g - np.eye(2))), np.max(np.abs(g + np.eye(2))))
            tol = 1e-6
        else:
            residual = 0.0 if cls == expected else 1.0
            tol = 0.5
        rows.append(_row("monodromy_classes", f"n={folds} ell={ell:.6g}", cls, expected, residual, tol, cls == expected and residual < tol))
    return rows


@register_check("berry_phase")
def _berry_phase(config: RunConfig, rng) -> List[Dict[str, Any]]:
    front = build_curve("circle", config.samples, dimension=3)
    report = moebius_monodromy.berry_check(front, 2.0)
    expected = 2.0 * math.pi * (1.0 - math.sqrt(3.0) / 2.0)
    angles = [abs(math.atan2(r.mobius_derivative.imag, r.mobius_derivative.real)) for r in report.records]
    angle_err = min(abs(a - expected) for a in angles) if angles else float("inf")
    return [
        _row("berry_phase", "circle ell=2 rotation angle", angles, expected, angle_err, 1e-6),
        _row("berry_phase", "circle ell=2 derivative formula", report.max_residual, 0.0, report.max_residual, 1e-5),
    ]


@register_check("planimeter")
def _planimeter(config: RunConfig, rng) -> List[Dict[str, Any]]:
    front = build_curve("circle", config.samples)
    report = moebius_monodromy.planimeter_check(front, eps_sweep())
    target = np.array([[0.0, -math.pi], [math.pi, 0.0]])
    area_err = float(np.max(np.abs(report.area.matrix - target)))
    return [
        _row("planimeter", "unit circle area operator", report.area.matrix, target, area_err, 1e-8),
        _row("planimeter", "error slope", report.slope, ">= 2.8", max(0.0, 2.8 - report.slope), 1e-12, report.slope >= 2.8),
    ]


@register_check("rolling")
def _rolling(config: RunConfig, rng) -> List[Dict[str, Any]]:
    rows = []
    for seed, front in _random_fronts(rng, RANDOM_FRONTS, config.samples):
        lifted = bike_dynamics.lorentz_lift_monodromy(front, 1.0)
        rolled = bike_dynamics.roll_hyperbolic(front, 1.0)
        scale = max(1.0, float(np.max(np.abs(lifted.matrix))))
        gap = float(np.max(np.abs(rolled.matrix - lifted.matrix))) / scale
        rows.append(_row("rolling", f"seed={seed} hyperbolic rolling vs Lorentz lift", gap, 0.0, gap, 1e-12))
        length = bike_dynamics.roll_sphere(front, 1.0).length_residual
        rows.append(_row("rolling", f"seed={seed} sphere rolling arclength", length, 0.0, length, 1e-6))
    return rows


@register_check("conjugacy")
def _conjugacy(config: RunConfig, rng) -> List[Dict[str, Any]]:
    partner = correspondence.gamma_kn(1, 2, 2 * config.samples)
    circle = build_curve("circle", 2 * config.samples, n_folds=2)
    lams = [0.3, 0.7, correspondence.ell_kn(1, 2), 1.5]
    rows = []
    for rec in correspondence.monodromy_conjugacy_check(partner, circle, lams):
        rows.append(_row("conjugacy", f"lambda={rec['lambda']:.6g}", rec["trace_1"], rec["trace_2"], rec["relative_error"], 1e-6))
    return rows


@register_check("integrals")
def _integrals(config: RunConfig, rng) -> List[Dict[str, Any]]:
    rows = []
    for rec in diffpoly.identity_chain():
        rows.append(_row("integrals", f"I_{rec['n']} vs F_{rec['n'] + 1}", rec["witness"], rec["coefficient"], 0.0 if rec["equal"] else 1.0, 0.5))
    return rows


@register_check("log_multiplier")
def _log_multiplier(config: RunConfig, rng) -> List[Dict[str, Any]]:
    front = build_curve("circle", config.samples)
    rows = []
    for ell in (0.1, 0.2, 0.3):
        value = bike_dynamics.log_multiplier(front, ell)
        expected = 2.0 * math.pi * math.sqrt(1.0 - ell * ell)
        rows.append(_row("log_multiplier", f"circle ell={ell:g}", value.real, expected, abs(value - expected), 1e-8))
    return rows


@register_check("zindler")
def _zindler(config: RunConfig, rng) -> List[Dict[str, Any]]:
    roots = correspondence.rotation_numbers(1, 4)
    worst = max(abs(math.tan(math.pi * rho) ** 2 - 5.0) for rho in roots)
    rows = [_row("zindler", "(1,4) tan^2 = 5", roots, [0.3661, 0.6339], worst, 1e-10, len(roots) == 2 and worst < 1e-10)]
    family = correspondence.zindler_family_report(1, 4, 4 * config.samples)
    rows.append(_row("zindler", "(1,4) certificates", family["passed"], True, 0.0 if family["passed"] else 1.0, 0.5))
    return rows


@register_check("akns")
def _akns(config: RunConfig, rng) -> List[Dict[str, Any]]:
    t = np.linspace(0.0, 4.0 * math.pi, config.samples + 1)
    frame = integrable.akns_integrate(0.5, 0.0, t)
    bike = integrable.darboux_bike_check(frame, 1.0, directions=None)
    stp = integrable.stp_frenet_check(integrable.akns_integrate(0.5, 0.3, t))
    law = bike.darboux.residuals["distance_law"]
    corr = bike.residuals
    return [
        _row("akns", "distance law mu=i", law, 2.0, law, 1e-8),
        _row("akns", "bicycle correspondence eps=1", corr.to_dict(), 2.0, max(corr.chord, corr.angle, corr.glide), 1e-6),
        _row("akns", "STP curvature lambda=0.3", stp["kappa_error"], 1.0, stp["kappa_error"], 1e-5),
        _row("akns", "STP torsion lambda=0.3", stp["tau_error"], -0.3, stp["tau_error"], 1e-5),
    ]


@register_check("buckled_rings")
def _buckled_rings(config: RunConfig, rng) -> List[Dict[str, Any]]:
    rows = []
    for curve_id in ("wegner_linear", "wegner_circular"):
        curve = build_curve(curve_id, 4096)
        p = curve.params
        residual = integrable.buckled_ring_residual(curve, p["lambda_el"], p["mu_el"])
        rows.append(_row("buckled_rings", f"{curve_id} EL residual", residual, 0.0, residual, 1e-5))
    ring = build_curve("wegner_circular", 4096)
    soliton = integrable.soliton_check(ring, 1e-4)
    rows.append(_row("buckled_rings", "circular ring soliton", soliton.mismatch, "< 10 dt^2 scale", soliton.mismatch, 10.0 * soliton.scale))
    ellipse = resample_arclength(build_curve("ellipse", config.samples), config.samples)
    control = integrable.soliton_check(ellipse, 1e-4)
    rows.append(
        _row("buckled_rings", "ellipse control", control.soliton, False, 0.0 if not control.soliton else 1.0, 0.5)
    )
    return rows


@register_check("klein")
def _klein(config: RunConfig, rng) -> List[Dict[str, Any]]:
    x = np.array([0.3, 0.0, 0.1])
    y = np.array([-0.2, 0.4, 0.0])
    rows = []
    for seed, front in _random_fronts(rng, RANDOM_FRONTS, config.samples):
        drift = moebius_monodromy.klein_drift(front, 1.0, x, y)
        rows.append(_row("klein", f"seed={seed} Klein distance drift", drift, 0.0, drift, 1e-8))
    return rows


def run_selftest(config: RunConfig, checks: Optional[Sequence[str]] = None) -> Dict[str, Any]:
    """Run the named checks (all by default) and return the report payload."""
    names = list(checks) if checks else check_names()
    unknown = [n for n in names if n not in _CHECKS]
    if unknown:
        raise ValidationError(f"unknown selftest checks: {unknown}")
    rng = np.random.default_rng(config.seed)
    rows: List[Dict[str, Any]] = []
    for name in names:
        logger.info(f"[Selftest] {name}")
        try:
            rows.extend(_CHECKS[name](config, rng))
        except (ValidationError,) + NUMERICAL_FAILURES as exc:
            # one broken check must not hide the others
            message = str(exc) if isinstance(exc, ValidationError) else str(as_numerical_error(exc))
            logger.error(f"[Selftest] {name} aborted: {message}")
            rows.append(_row(name, "aborted", message, None, float("inf"), 0.0, False))
    failed = [f"{r['check']}: {r['case']}" for r in rows if not r["passed"]]
    for item in failed:
        logger.error(f"[Selftest] FAILED {item}")
    return {"seed": config.seed, "samples": config.samples, "checks": rows, "failed": failed, "passed": not failed}
