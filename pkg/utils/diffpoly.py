# utils/diffpoly.py
"""
Differential polynomials in curvature and torsion.

Goals:
- Exact algebra on polynomials in κ, τ and their arclength derivatives, with
  Gaussian-rational coefficients (sympy does the bookkeeping).
- The series Z_n of the unstable periodic solution, the monodromy integrands
  I_n, the filament vector fields x_i and the filament integrals F_i.
- Decide equality modulo total derivatives and return the witness.
- Evaluate any integrand along a sampled curve.

Symbols are `kappa_j` / `tau_j` for the j-th derivative; κ^{(j)} and τ^{(j)}
carry weight j + 1, so d/dt raises the weight of a homogeneous polynomial by
exactly one.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy as sp
from scipy import integrate

from server.conf import settings
from utils.curves import FrenetData
from utils.errors import NumericalDiagnosticError, ValidationError

logger = logging.getLogger(__name__)

SYMBOL_NAMES = ("kappa", "tau")
DISPLAY = {"kappa": "κ", "tau": "τ"}
# np.gradient chained past this order is too noisy to integrate.
OPEN_CURVE_MAX_ORDER = 4

Jet = Tuple[str, int]
Monomial = Tuple[Tuple[Jet, int], ...]


@lru_cache(maxsize=None)
def jet(name: str, order: int = 0) -> sp.Symbol:
    if name not in SYMBOL_NAMES:
        raise ValidationError(f"unknown symbol '{name}' (expected one of {SYMBOL_NAMES})")
    if order < 0:
        raise ValidationError(f"derivative order must be >= 0, got {order}")
    return sp.Symbol("_".join([name, str(order)]), real=True)


def _jet_of(symbol: sp.Symbol) -> Jet:
    name, order = symbol.name.rsplit("_", 1)
    return name, int(order)


def monomial_weight(mono: Monomial) -> int:
    return sum((order + 1) * power for (_, order), power in mono)


def monomial_expr(mono: Monomial) -> sp.Expr:
    return sp.Mul(*[jet(name, order) ** power for (name, order), power in mono])


def _as_expr(value) -> sp.Expr:
    if isinstance(value, DiffPoly):
        return value.expr
    if isinstance(value, complex):
        return sp.nsimplify(value.real) + sp.I * sp.nsimplify(value.imag)
    return sp.sympify(value)


@dataclass(frozen=True, eq=False)
class DiffPoly:
    """A polynomial in κ^{(j)}, τ^{(j)}, held as an expanded sympy expression."""

    expr: Any = 0

    def __post_init__(self):
        expr = sp.expand(_as_expr(self.expr))
        bad = [s for s in expr.free_symbols if not isinstance(s, sp.Symbol) or s.name.rsplit("_", 1)[0] not in SYMBOL_NAMES]
        if bad:
            raise ValidationError(f"DiffPoly only admits kappa_j / tau_j symbols, got {sorted(map(str, bad))}")
        object.__setattr__(self, "expr", expr)

    @classmethod
    def kappa(cls, order: int = 0) -> "DiffPoly":
        return cls(jet("kappa", order))

    @classmethod
    def tau(cls, order: int = 0) -> "DiffPoly":
        return cls(jet("tau", order))

    # arithmetic ---------------------------------------------------------
    def __add__(self, other) -> "DiffPoly":
        return DiffPoly(self.expr + _as_expr(other))

    __radd__ = __add__

    def __sub__(self, other) -> "DiffPoly":
        return DiffPoly(self.expr - _as_expr(other))

    def __rsub__(self, other) -> "DiffPoly":
        return DiffPoly(_as_expr(other) - self.expr)

    def __mul__(self, other) -> "DiffPoly":
        return DiffPoly(self.expr * _as_expr(other))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "DiffPoly":
        """Division by a nonzero constant; ints stay exact (p / 2 has coefficient 1/2)."""
        divisor = _as_expr(other)
        if divisor.free_symbols:
            raise ValidationError(f"DiffPoly divides by constants only, got {divisor}")
        if divisor == 0:
            raise ValidationError("division of a DiffPoly by zero")
        return DiffPoly(self.expr / divisor)

    def __neg__(self) -> "DiffPoly":
        return DiffPoly(-self.expr)

    def __pow__(self, k: int) -> "DiffPoly":
        return DiffPoly(self.expr ** int(k))

    def __eq__(self, other) -> bool:
        try:
            return sp.expand(self.expr - _as_expr(other)) == 0
        except (sp.SympifyError, TypeError):
            return NotImplemented

    def __hash__(self) -> int:
        return hash(self.expr)

    def __repr__(self) -> str:
        return f"DiffPoly({self.pretty()})"

    # structure ----------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return self.expr == 0

    def jets(self) -> List[Jet]:
        return sorted(_jet_of(s) for s in self.expr.free_symbols)

    def max_order(self, name: str) -> int:
        """Highest derivative order of `name` present, -1 if absent."""
        return max((o for n, o in self.jets() if n == name), default=-1)

    def terms(self) -> List[Tuple[sp.Expr, Monomial]]:
        """(coefficient, monomial) pairs in canonical order."""
        if self.is_zero:
            return []
        gens = sorted(self.expr.free_symbols, key=_jet_of)
        re_part, im_part = self.expr.as_real_imag()
        merged: Dict[Monomial, sp.Expr] = {}
        for part, unit in ((re_part, sp.Integer(1)), (im_part, sp.I)):
            part = sp.expand(part)
            if part == 0:
                continue
            if not gens:
                merged[()] = merged.get((), 0) + part * unit
                continue
            for exps, coeff in sp.Poly(part, *gens).terms():
                mono = tuple((_jet_of(g), int(e)) for g, e in zip(gens, exps) if e)
                merged[mono] = merged.get(mono, 0) + coeff * unit
        out = [(sp.expand(c), m) for m, c in merged.items() if sp.expand(c) != 0]
        out.sort(key=lambda cm: tuple((n, o, -p) for (n, o), p in cm[1]))
        return out

    def components(self) -> Dict[int, Dict[Monomial, sp.Expr]]:
        """Homogeneous components keyed by weight."""
        comps: Dict[int, Dict[Monomial, sp.Expr]] = {}
        for coeff, mono in self.terms():
            comps.setdefault(monomial_weight(mono), {})[mono] = coeff
        return comps

    @property
    def weights(self) -> List[int]:
        return sorted(self.components())

    @property
    def is_homogeneous(self) -> bool:
        return len(self.weights) <= 1

    def real(self) -> "DiffPoly":
        return DiffPoly(self.expr.as_real_imag()[0])

    def imag(self) -> "DiffPoly":
        return DiffPoly(self.expr.as_real_imag()[1])

    def derivative(self) -> "DiffPoly":
        return dp_derivative(self)

    # rendering ----------------------------------------------------------
    def to_json(self) -> List[Dict[str, Any]]:
        rows = []
        for coeff, mono in self.terms():
            re_c, im_c = coeff.as_real_imag()
            rows.append(
                {
                    "coeff_re": str(sp.nsimplify(re_c)),
                    "coeff_im": str(sp.nsimplify(im_c)),
                    "factors": [{"symbol": name, "deriv_order": order, "power": power} for (name, order), power in mono],
                }
            )
        return rows

    def pretty(self) -> str:
        if self.is_zero:
            return "0"
        parts = []
        for coeff, mono in self.terms():
            factors = [DISPLAY[name] + "'" * order + (f"^{power}" if power > 1 else "") for (name, order), power in mono]
            c = sp.sstr(coeff)
            if not factors:
                parts.append(c)
            elif coeff == 1:
                parts.append("·".join(factors))
            elif coeff == -1:
                parts.append("-" + "·".join(factors))
            else:
                c = f"({c})" if coeff.is_Add else c
                parts.append(c + "·" + "·".join(factors))
        return " + ".join(parts).replace("+ -", "- ")


def dp_derivative(p: DiffPoly) -> DiffPoly:
    """Leibniz arclength derivative: Σ ∂p/∂s_j · s_{j+1}."""
    expr = p.expr
    total = sp.Integer(0)
    for sym in expr.free_symbols:
        name, order = _jet_of(sym)
        total += sp.diff(expr, sym) * jet(name, order + 1)
    return DiffPoly(total)


@dataclass(frozen=True, eq=False)
class FrameField:
    """A vector field along the curve, by components on the Frenet frame (v, n, b)."""

    v: DiffPoly
    n: DiffPoly
    b: DiffPoly

    def __post_init__(self):
        for name in ("v", "n", "b"):
            value = getattr(self, name)
            if not isinstance(value, DiffPoly):
                object.__setattr__(self, name, DiffPoly(value))

    def __eq__(self, other) -> bool:
        if not isinstance(other, FrameField):
            return NotImplemented
        return self.v == other.v and self.n == other.n and self.b == other.b

    def __hash__(self) -> int:
        return hash((self.v, self.n, self.b))

    def dot(self, other: "FrameField") -> DiffPoly:
        return self.v * other.v + self.n * other.n + self.b * other.b

    def derivative(self) -> "FrameField":
        """Arclength derivative using v' = κn, n' = -κv + τb, b' = -τn."""
        k, t = DiffPoly.kappa(), DiffPoly.tau()
        return FrameField(
            v=self.v.derivative() - k * self.n,
            n=self.n.derivative() + k * self.v - t * self.b,
            b=self.b.derivative() + t * self.n,
        )

    def to_json(self) -> Dict[str, Any]:
        return {"v": self.v.to_json(), "n": self.n.to_json(), "b": self.b.to_json()}

    def pretty(self) -> str:
        parts = []
        for name in ("v", "n", "b"):
            comp = getattr(self, name)
            if not comp.is_zero:
                parts.append(f"({comp.pretty()}) {name}")
        return " + ".join(parts) if parts else "0"


# ----------------------------------------------------------------------
# series
# ----------------------------------------------------------------------
def _check_order(N: int) -> int:
    N = int(N)
    if N < 0:
        raise ValidationError(f"N must be >= 0, got {N}")
    return N


def zn_series(N: int) -> List[DiffPoly]:
    """
    Coefficients Z_0..Z_N of the unstable periodic solution Z = Σ ℓʲ Z_j.

    Matching powers of ℓ in ℓŻ = Z − ℓf with f = iτZ + (κ/2)(1 + Z²) gives
    Z_0 = 0 and Z_m = Ż_{m−1} + f_{m−1}.
    """
    N = _check_order(N)
    k, t = DiffPoly.kappa(), DiffPoly.tau()
    half = sp.Rational(1, 2)
    zs = [DiffPoly(0)]
    for m in range(1, N + 1):
        prev = m - 1
        square = DiffPoly(sum((zs[a].expr * zs[prev - a].expr for a in range(prev + 1)), sp.Integer(0)))
        f_prev = sp.I * t * zs[prev] + half * k * (square + (1 if prev == 0 else 0))
        zs.append(zs[prev].derivative() + f_prev)
    return zs


def monodromy_integrands(N: int, reduced: bool = False) -> List[DiffPoly]:
    """
    Integrands I_0..I_N: the coefficient of ℓⁿ in 1 − iℓτ − ℓκZ.

    With `reduced=True` each is replaced by its normal form modulo total
    derivatives, which is the form the identity chain with F_i holds in.
    """
    N = _check_order(N)
    k, t = DiffPoly.kappa(), DiffPoly.tau()
    zs = zn_series(max(N - 1, 0))
    out = []
    for n in range(N + 1):
        if n == 0:
            term = DiffPoly(1)
        elif n == 1:
            term = -sp.I * t
        else:
            term = -k * zs[n - 1]
        out.append(reduce_mod_total_derivative(term)[0] if reduced else term)
    return out


def filament_fields(N: int) -> List[FrameField]:
    """
    Vector fields x_0..x_N with ẋ_i = v × x_{i+1} and Σ_{p+q=i} x_p·x_q = δ_{i0}.

    In the frame, v × (A, B, C) = (0, −C, B), so the n and b components of
    x_{i+1} are read off ẋ_i; the normalization fixes the v component.
    """
    N = _check_order(N)
    half = sp.Rational(1, 2)
    xs = [FrameField(v=DiffPoly(-1), n=DiffPoly(0), b=DiffPoly(0))]
    for i in range(N):
        dx = xs[i].derivative()
        if not dx.v.is_zero:
            raise NumericalDiagnosticError(f"[DiffPoly] x_{i} derivative has a v-component: {dx.v.pretty()}")
        s = DiffPoly(sum((xs[p].dot(xs[i + 1 - p]).expr for p in range(1, i + 1)), sp.Integer(0)))
        xs.append(FrameField(v=half * s, n=dx.b, b=-dx.n))
    return xs


def _explicit_filament_integrals() -> List[DiffPoly]:
    k, t = DiffPoly.kappa(), DiffPoly.tau()
    return [
        DiffPoly(1),
        t,
        k**2,
        k**2 * t,
        DiffPoly.kappa(1) ** 2 + k**2 * t**2 - sp.Rational(1, 4) * k**4,
    ]


def generated_filament_integral(n: int) -> DiffPoly:
    """F_n from the v-component of x_{n−1}: (2/(n−2)) × normal form of v·x_{n−1}."""
    if n < 3:
        raise ValidationError(f"generated filament integrals start at n = 3, got {n}")
    xs = filament_fields(n - 1)
    reduced, _ = reduce_mod_total_derivative(xs[n - 1].v)
    return sp.Rational(2, n - 2) * reduced


def filament_integrands(N: int) -> List[DiffPoly]:
    """F_1..F_N. The first five are the listed ones; later ones are experimental."""
    N = _check_order(N)
    out = _explicit_filament_integrals()[:N]
    if N > settings.FILAMENT_EXPLICIT:
        logger.warning(
            f"[DiffPoly] F_{settings.FILAMENT_EXPLICIT + 1}..F_{N} are generated from the field hierarchy (experimental)"
        )
        for n in range(settings.FILAMENT_EXPLICIT + 1, N + 1):
            out.append(generated_filament_integral(n))
    return out


# ----------------------------------------------------------------------
# reduction modulo total derivatives
# ----------------------------------------------------------------------
def _jets_up_to(weight: int) -> List[Jet]:
    return [(name, order) for name in SYMBOL_NAMES for order in range(weight)]


def _monomials(weight: int, jets: Sequence[Jet], start: int = 0):
    if weight == 0:
        yield ()
        return
    for i in range(start, len(jets)):
        jw = jets[i][1] + 1
        for power in range(1, weight // jw + 1):
            for rest in _monomials(weight - power * jw, jets, i + 1):
                yield ((jets[i], power),) + rest


def monomials_of_weight(weight: int) -> List[Monomial]:
    return list(_monomials(int(weight), _jets_up_to(int(weight))))


def _elimination_key(mono: Monomial):
    # prefer eliminating monomials with the highest derivative, linear in it
    top = max(order for (_, order), _ in mono)
    top_power = sum(power for (_, order), power in mono if order == top)
    return (-top, top_power, mono)


@dataclass(frozen=True)
class _ReductionData:
    targets: Tuple[Monomial, ...]
    sources: Tuple[Monomial, ...]
    rows: Tuple[Tuple[int, Tuple[sp.Rational, ...], Tuple[sp.Rational, ...]], ...]


@lru_cache(maxsize=None)
def _reduction_data(weight: int) -> _ReductionData:
    targets = tuple(sorted(monomials_of_weight(weight), key=_elimination_key))
    sources = tuple(monomials_of_weight(weight - 1)) if weight >= 2 else ()
    index = {m: i for i, m in enumerate(targets)}
    if not sources:
        return _ReductionData(targets=targets, sources=(), rows=())
    image = sp.zeros(len(sources), len(targets))
    for r, src in enumerate(sources):
        for coeff, mono in DiffPoly(monomial_expr(src)).derivative().terms():
            image[r, index[mono]] = coeff
    reduced, pivots = image.row_join(sp.eye(len(sources))).rref()
    rows = []
    for r, col in enumerate(pivots):
        if col >= len(targets):
            break
        rows.append(
            (
                col,
                tuple(reduced[r, j] for j in range(len(targets))),
                tuple(reduced[r, len(targets) + j] for j in range(len(sources))),
            )
        )
    logger.debug(f"[DiffPoly] weight {weight}: {len(targets)} monomials, {len(rows)} eliminable")
    return _ReductionData(targets=targets, sources=sources, rows=tuple(rows))


def reduce_mod_total_derivative(p: DiffPoly) -> Tuple[DiffPoly, DiffPoly]:
    """
    Normal form of p modulo total derivatives: returns (r, w) with p = r + dw/dt.

    r contains no monomial that can be eliminated; two polynomials differ by a
    total derivative exactly when their normal forms agree.
    """
    reduced = sp.Integer(0)
    witness = sp.Integer(0)
    for weight, coeffs in p.components().items():
        if weight == 0:
            reduced += coeffs[()]
            continue
        if weight > settings.DIFFPOLY_MAX_WEIGHT:
            raise ValidationError(
                f"weight {weight} exceeds DIFFPOLY_MAX_WEIGHT={settings.DIFFPOLY_MAX_WEIGHT}"
            )
        data = _reduction_data(weight)
        vec = [coeffs.get(m, sp.Integer(0)) for m in data.targets]
        for col, target_row, source_row in data.rows:
            c = vec[col]
            if c == 0:
                continue
            vec = [a - c * b for a, b in zip(vec, target_row)]
            witness += c * sum((s * monomial_expr(m) for s, m in zip(source_row, data.sources) if s != 0), sp.Integer(0))
        reduced += sum((a * monomial_expr(m) for a, m in zip(vec, data.targets) if a != 0), sp.Integer(0))
    return DiffPoly(reduced), DiffPoly(witness)


@dataclass(frozen=True, eq=False)
class TotalDerivativeResult:
    equal: Optional[bool]
    witness: Optional[DiffPoly]
    remainder: Optional[DiffPoly]
    status: str

    def __bool__(self) -> bool:
        return bool(self.equal)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "equal": self.equal,
            "status": self.status,
            "witness": None if self.witness is None else self.witness.to_json(),
            "remainder": None if self.remainder is None else self.remainder.to_json(),
        }


def equal_mod_total_derivative(p, q) -> TotalDerivativeResult:
    """Decide p ≡ q (mod d/dt of a differential polynomial); p − q = dw/dt when equal."""
    diff = DiffPoly(_as_expr(p) - _as_expr(q))
    top = max(diff.weights, default=0)
    if top > settings.DIFFPOLY_MAX_WEIGHT:
        logger.warning(f"[DiffPoly] weight {top} above the reduction bound; result inconclusive")
        return TotalDerivativeResult(equal=None, witness=None, remainder=None, status="inconclusive")
    remainder, witness = reduce_mod_total_derivative(diff)
    equal = remainder.is_zero
    return TotalDerivativeResult(
        equal=equal,
        witness=witness if equal else None,
        remainder=remainder,
        status="equal" if equal else "different",
    )


def parity_report(N: int) -> List[Dict[str, Any]]:
    """
    Whether reduced I_n is real for even n and imaginary for odd n.

    Only n <= 4 is backed by the explicit identity chain; beyond that the
    rows are observations and a failure is logged, not raised.
    """
    rows = []
    for n, integrand in enumerate(monodromy_integrands(N, reduced=True)):
        real_zero = integrand.real().is_zero
        imag_zero = integrand.imag().is_zero
        expected = "real" if n % 2 == 0 else "imaginary"
        holds = imag_zero if n % 2 == 0 else real_zero
        if not holds:
            logger.warning(f"[DiffPoly] parity fails at n={n}: {integrand.pretty()}")
        rows.append(
            {
                "n": n,
                "expected": expected,
                "holds": holds,
                "status": "verified" if n <= 4 else "observed",
                "integrand": integrand.pretty(),
            }
        )
    return rows


IDENTITY_CHAIN = (sp.Integer(1), -sp.I, -sp.Rational(1, 2), -sp.I / 2, sp.Rational(1, 2))


def identity_chain() -> List[Dict[str, Any]]:
    """I_n ≡ c_n F_{n+1} for n = 0..4, each with its total-derivative witness."""
    raw = monodromy_integrands(len(IDENTITY_CHAIN) - 1)
    fs = filament_integrands(len(IDENTITY_CHAIN))
    rows = []
    for n, coeff in enumerate(IDENTITY_CHAIN):
        result = equal_mod_total_derivative(raw[n], fs[n] * coeff)
        rows.append(
            {
                "n": n,
                "coefficient": str(coeff),
                "equal": bool(result),
                "witness": "" if result.witness is None else result.witness.pretty(),
            }
        )
        logger.info(f"[DiffPoly] I_{n} vs {coeff}*F_{n + 1}: {result.status}")
    return rows


def integrand_table(N: int) -> List[Dict[str, Any]]:
    """One row per n: Z_n, raw I_n, reduced I_n and F_n (when n >= 1)."""
    N = _check_order(N)
    zs = zn_series(N)
    raw = monodromy_integrands(N)
    fs = filament_integrands(min(N, settings.FILAMENT_EXPLICIT)) if N >= 1 else []
    rows = []
    for n in range(N + 1):
        rows.append(
            {
                "n": n,
                "Z": zs[n].pretty(),
                "I": raw[n].pretty(),
                "I_reduced": reduce_mod_total_derivative(raw[n])[0].pretty(),
                "F": fs[n - 1].pretty() if 1 <= n <= len(fs) else "",
            }
        )
    return rows


# ----------------------------------------------------------------------
# numerical evaluation along a curve
# ----------------------------------------------------------------------
def evaluate_on_curve(p: DiffPoly, geo: FrenetData, closed: Optional[bool] = None) -> complex:
    """
    ∫ p dt along the sampled curve.

    Closed curves use spectral derivatives and the rectangle rule (spectrally
    accurate for periodic data); open curves use chained second-order
    differences and the trapezoid rule.
    """
    closed = geo.closed if closed is None else bool(closed)
    if closed and not geo.closed:
        raise ValidationError("closed quadrature requested on open Frenet data")

    orders = {name: p.max_order(name) for name in SYMBOL_NAMES}
    top = max(orders.values())
    if not geo.closed and top > OPEN_CURVE_MAX_ORDER:
        raise ValidationError(f"derivative order {top} exceeds the open-curve stencil limit {OPEN_CURVE_MAX_ORDER}")
    if top >= len(geo.s) // 2:
        raise ValidationError(f"derivative order {top} needs more than {len(geo.s)} samples")

    profiles = {"kappa": np.asarray(geo.curvature, dtype=float)}
    if orders["tau"] >= 0:
        profiles["tau"] = np.zeros_like(profiles["kappa"]) if geo.dimension == 2 else np.asarray(geo.require_torsion(), dtype=float)

    cache: Dict[Jet, np.ndarray] = {}

    def column(name: str, order: int) -> np.ndarray:
        if (name, order) not in cache:
            cache[(name, order)] = np.real(geo.derivative(profiles[name], order))
        return cache[(name, order)]

    values = np.zeros(len(geo.s), dtype=complex)
    for coeff, mono in p.terms():
        term = np.full(len(geo.s), complex(coeff), dtype=complex)
        for (name, order), power in mono:
            term *= column(name, order) ** power
        values += term

    if closed:
        total = complex(np.sum(values) * geo.spacing)
    else:
        total = complex(integrate.trapezoid(values, geo.s))
    logger.debug(f"[DiffPoly] ∫({p.pretty()}) = {total:.6g}")
    return total
