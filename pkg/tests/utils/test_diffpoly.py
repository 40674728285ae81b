# tests/utils/test_diffpoly.py
import math

import pytest
import sympy as sp

from utils.curves import build_curve, frenet_data
from utils.diffpoly import (
    DiffPoly,
    equal_mod_total_derivative,
    evaluate_on_curve,
    filament_fields,
    filament_integrands,
    generated_filament_integral,
    identity_chain,
    jet,
    monodromy_integrands,
    monomial_weight,
    parity_report,
    reduce_mod_total_derivative,
    zn_series,
)
from utils.errors import ValidationError

K = DiffPoly.kappa()
K1 = DiffPoly.kappa(1)
T = DiffPoly.tau()
HALF = sp.Rational(1, 2)


class TestAlgebra:
    def test_jets(self):
        assert jet("kappa", 2).name == "kappa_2"
        with pytest.raises(ValidationError):
            jet("omega")
        with pytest.raises(ValidationError):
            jet("tau", -1)

    def test_derivative_follows_the_product_rule(self):
        assert (K**2).derivative() == K * K1 * 2
        assert (K * T).derivative() == K1 * T + K * DiffPoly.tau(1)

    def test_weights(self):
        assert monomial_weight(((("kappa", 1), 2),)) == 4
        assert (K * K1 + T**3).weights == [3]
        assert (K + K**2).weights == [1, 2]

    def test_foreign_symbols_rejected(self):
        with pytest.raises(ValidationError):
            DiffPoly(sp.Symbol("x"))

    def test_real_and_imaginary_parts(self):
        p = K**2 + T * sp.I
        assert p.real() == K**2
        assert p.imag() == T

    def test_division_by_constants_is_exact(self):
        assert (K**2 + T) / 2 == K**2 * HALF + T * HALF
        assert (K * sp.I) / sp.I == K
        with pytest.raises(ValidationError):
            K / 0
        with pytest.raises(ValidationError):
            K**2 / K


class TestSeries:
    def test_first_coefficients(self):
        zs = zn_series(3)
        assert zs[0].is_zero
        assert zs[1] == K * HALF
        assert zs[2] == K1 * HALF + K * T * (sp.I / 2)

    def test_third_coefficient(self):
        zs = zn_series(3)
        expected = (
            DiffPoly.kappa(2) * HALF
            + K1 * T * sp.I
            + K * DiffPoly.tau(1) * (sp.I / 2)
            - K * T**2 * HALF
            + K**3 * sp.Rational(1, 8)
        )
        assert zs[3] == expected

    def test_integrands(self):
        raw = monodromy_integrands(3)
        assert raw[0] == DiffPoly(1)
        assert raw[1] == T * (-sp.I)
        assert raw[2] == K**2 * (-HALF)
        assert raw[3] == K * K1 * (-HALF) + K**2 * T * (-sp.I / 2)

    def test_fourth_integrand(self):
        raw = monodromy_integrands(4)
        expected = (
            K * DiffPoly.kappa(2) * (-HALF)
            + K * K1 * T * (-sp.I)
            + K**2 * DiffPoly.tau(1) * (-sp.I / 2)
            + K**2 * T**2 * HALF
            - K**4 * sp.Rational(1, 8)
        )
        assert raw[4] == expected

    def test_negative_order_rejected(self):
        with pytest.raises(ValidationError):
            zn_series(-1)


class TestTotalDerivatives:
    def test_exact_derivative_reduces_to_zero(self):
        reduced, witness = reduce_mod_total_derivative(K1)
        assert reduced.is_zero
        assert witness == K

    def test_integration_by_parts(self):
        result = equal_mod_total_derivative(K * DiffPoly.kappa(2), K1**2 * -1)
        assert result.equal
        assert (K * DiffPoly.kappa(2) + K1**2) == result.witness.derivative()

    def test_different_classes(self):
        result = equal_mod_total_derivative(K**2, 0)
        assert result.equal is False
        assert result.status == "different"
        assert result.remainder == K**2
        assert result.to_dict()["witness"] is None

    def test_third_integrand_witness(self):
        raw = monodromy_integrands(3)
        result = equal_mod_total_derivative(raw[3], K**2 * T * (-sp.I / 2))
        assert result.equal
        assert result.witness == K**2 * sp.Rational(-1, 4)

    def test_fourth_integrand_is_half_the_fifth_filament_integral(self):
        raw = monodromy_integrands(4)
        f5 = filament_integrands(5)[4]
        result = equal_mod_total_derivative(raw[4], f5 / 2)
        assert result.equal
        assert result.witness == K * K1 * (-HALF) + K**2 * T * (-sp.I / 2)
        assert raw[4] - f5 / 2 == result.witness.derivative()


class TestFilamentHierarchy:
    def test_first_fields(self):
        xs = filament_fields(2)
        assert xs[0].v == DiffPoly(-1)
        assert xs[1].v.is_zero and xs[1].n.is_zero
        assert xs[1].b == K
        assert xs[2].v == K**2 * HALF
        assert xs[2].n == K1
        assert xs[2].b == K * T

    def test_third_field(self):
        x3 = filament_fields(3)[3]
        assert x3.v == K**2 * T
        assert x3.n == K1 * T * 2 + K * DiffPoly.tau(1)
        assert x3.b == K * T**2 - DiffPoly.kappa(2) - K**3 * HALF

    def test_fields_are_normalized(self):
        xs = filament_fields(4)
        for i in range(1, 5):
            total = sum((xs[p].dot(xs[i - p]) for p in range(i + 1)), DiffPoly(0))
            assert total.is_zero

    def test_listed_integrals(self):
        fs = filament_integrands(5)
        assert fs[:4] == [DiffPoly(1), T, K**2, K**2 * T]
        assert fs[4] == K1**2 + K**2 * T**2 - K**4 * sp.Rational(1, 4)

    @pytest.mark.parametrize("n", [3, 4])
    def test_generated_integrals_match_the_listed_ones(self, n):
        assert generated_filament_integral(n) == filament_integrands(n)[n - 1]

    def test_generation_starts_at_three(self):
        with pytest.raises(ValidationError):
            generated_filament_integral(2)


def test_identity_chain_holds_through_fourth_order():
    rows = identity_chain()
    assert [r["n"] for r in rows] == [0, 1, 2, 3, 4]
    assert all(r["equal"] for r in rows)
    assert rows[3]["witness"] != ""


def test_parity_of_reduced_integrands():
    rows = parity_report(4)
    assert all(r["holds"] for r in rows)
    assert [r["expected"] for r in rows[:2]] == ["real", "imaginary"]


class TestEvaluation:
    def test_circle_integrals(self):
        geo = frenet_data(build_curve("circle", 1024))
        assert evaluate_on_curve(DiffPoly(1), geo).real == pytest.approx(2.0 * math.pi)
        assert evaluate_on_curve(K**2, geo).real == pytest.approx(2.0 * math.pi, rel=1e-8)
        assert abs(evaluate_on_curve(K1**2, geo)) < 1e-10

    def test_circle_monodromy_integrals(self):
        geo = frenet_data(build_curve("circle", 1024))
        raw = monodromy_integrands(4)
        assert evaluate_on_curve(raw[2], geo).real == pytest.approx(-math.pi, rel=1e-8)
        assert evaluate_on_curve(raw[4], geo).real == pytest.approx(-math.pi / 4.0, rel=1e-8)
        assert abs(evaluate_on_curve(raw[4], geo).imag) < 1e-10

    def test_helix_total_torsion(self):
        helix = build_curve("helix", 1024)
        total = evaluate_on_curve(T, frenet_data(helix))
        assert total.real == pytest.approx(0.5 * helix.span, rel=1e-3)

    def test_closed_quadrature_on_open_data_rejected(self):
        with pytest.raises(ValidationError):
            evaluate_on_curve(K, frenet_data(build_curve("helix", 256)), closed=True)
