# tests/utils/test_moebius_monodromy.py
import math

import numpy as np
import pytest

from utils.bike_dynamics import lorentz_lift_flow, lorentz_lift_monodromy
from utils.correspondence import ell_kn
from utils.curves import build_curve
from utils.errors import ValidationError
from utils.moebius_monodromy import (
    act_on_sphere,
    area_bivector,
    berry_check,
    classify,
    derivative_at_fixed_point,
    fixed_point_residual,
    fixed_points,
    hatchet_angle,
    hermitian_of,
    inverse_lorentz,
    klein_distance,
    klein_drift,
    lorentz_from_reduction,
    moebius_from_lorentz,
    monodromy_element,
    monodromy_report,
    planimeter_check,
    reduction_flow,
    transport_check,
    vector_of,
)


class TestHermitianModel:
    @pytest.mark.parametrize("n", [2, 3])
    def test_vector_of_inverts_hermitian_of(self, n):
        x = np.arange(1.0, n + 2.0)
        np.testing.assert_allclose(vector_of(hermitian_of(x, n), n), x)

    def test_reduction_lands_in_lorentz_group(self):
        g = np.array([[1.0 + 0.5j, 0.3], [0.2j, 1.0]])
        g = g / np.sqrt(np.linalg.det(g))
        m = lorentz_from_reduction(g, 3)
        j = np.diag([1.0, 1.0, 1.0, -1.0])
        np.testing.assert_allclose(m.T @ j @ m, j, atol=1e-12)
        assert m[3, 3] > 0

    def test_large_boost_keeps_its_reduction(self):
        m = lorentz_from_reduction(np.diag([1e3, 1e-3]), 2)
        element = moebius_from_lorentz(m)
        assert np.max(np.abs(m)) > 1e5
        assert element.reduction_residual < 1e-6
        assert classify(element) == "hyperbolic"

    def test_non_lorentz_matrix_rejected(self):
        with pytest.raises(ValidationError):
            moebius_from_lorentz(np.diag([2.0, 1.0, 1.0]))


class TestClassification:
    @pytest.mark.parametrize(
        "ell, expected",
        [(0.5, "hyperbolic"), (1.0, "parabolic"), (1.5, "elliptic")],
    )
    def test_unit_circle_classes(self, ell, expected):
        element = monodromy_element(build_curve("circle", 1024), ell)
        assert classify(element) == expected

    @pytest.mark.parametrize("k, n", [(1, 2), (1, 3), (2, 3)])
    def test_multi_fold_circle_is_trivial_at_ell_kn(self, k, n):
        element = monodromy_element(build_curve("circle", 1024 * n, n_folds=n), ell_kn(k, n))
        g = element.reduction
        assert min(np.max(np.abs(g - np.eye(2))), np.max(np.abs(g + np.eye(2)))) < 1e-6
        assert classify(element) == "trivial"
        assert fixed_points(element) == []

    @pytest.mark.parametrize("folds", [2, 3, 4])
    def test_multi_fold_circle_below_one_is_hyperbolic(self, folds):
        element = monodromy_element(build_curve("circle", 256 * folds, n_folds=folds), 0.5)
        assert np.max(np.abs(element.matrix)) > 10.0
        assert element.lorentz.j_residual < 1e-10
        assert element.reduction_residual < 1e-6
        assert classify(element) == "hyperbolic"

    def test_spatial_front_reduction_reproduces_matrix(self):
        element = monodromy_element(build_curve("trefoil", 512), 0.1)
        assert element.dimension == 3
        assert element.reduction_residual < 1e-6
        assert classify(element) == "hyperbolic"


class TestFixedPoints:
    def test_hyperbolic_circle_has_two_fixed_directions(self):
        element = monodromy_element(build_curve("circle", 1024), 0.5)
        fps = fixed_points(element)
        assert len(fps) == 2
        for fp in fps:
            assert fixed_point_residual(element, fp) < 1e-8
        d1, d2 = (derivative_at_fixed_point(element, fp) for fp in fps)
        assert d1 * d2 == pytest.approx(1.0, abs=1e-8)

    def test_non_fixed_point_rejected(self):
        element = monodromy_element(build_curve("circle", 512), 0.5)
        with pytest.raises(ValidationError):
            derivative_at_fixed_point(element, [1.0, 0.0])

    @pytest.mark.parametrize("folds", [1, 2, 3])
    def test_repelling_point_of_a_large_boost(self, folds):
        element = monodromy_element(build_curve("circle", 256 * folds, n_folds=folds), 0.5)
        fps = fixed_points(element)
        assert len(fps) == 2
        for fp in fps:
            assert fixed_point_residual(element, fp) < 1e-8
        d1, d2 = (derivative_at_fixed_point(element, fp) for fp in fps)
        assert min(abs(d1), abs(d2)) < 1.0 < max(abs(d1), abs(d2))
        assert d1 * d2 == pytest.approx(1.0, abs=1e-8)

    def test_report_on_a_coarse_circle(self):
        payload = monodromy_report(build_curve("circle", 256), 0.5).to_json()
        assert payload["class"] == "hyperbolic"
        assert len(payload["fixed_points"]) == 2
        assert payload["residuals"]["fixed_point_residual"] < 1e-8

    def test_report_collects_fixed_point_data(self):
        report = monodromy_report(build_curve("circle", 1024), 0.5)
        payload = report.to_json()
        assert payload["class"] == "hyperbolic"
        assert len(payload["fixed_points"]) == 2
        assert payload["residuals"]["derivative_product"] < 1e-8
        assert payload["residuals"]["J_residual"] < 1e-10


def test_berry_phase_on_the_unit_circle():
    report = berry_check(build_curve("circle", 1024, dimension=3), 2.0)
    expected = 2.0 * math.pi * (1.0 - math.sqrt(3.0) / 2.0)
    angles = [abs(math.atan2(r.mobius_derivative.imag, r.mobius_derivative.real)) for r in report.records]
    assert min(abs(a - expected) for a in angles) < 1e-6
    assert report.max_residual < 1e-5


def test_berry_check_needs_closed_front():
    with pytest.raises(ValidationError):
        berry_check(build_curve("helix", 256), 1.0)


class TestPlanimeter:
    def test_area_operator_of_unit_circle(self):
        area = area_bivector(build_curve("circle", 1024))
        np.testing.assert_allclose(area.matrix, [[0.0, -math.pi], [math.pi, 0.0]], atol=1e-8)

    def test_axial_vector_in_space(self):
        area = area_bivector(build_curve("circle", 256, dimension=3))
        np.testing.assert_allclose(area.axial, [0.0, 0.0, math.pi], atol=1e-8)
        np.testing.assert_allclose(area.apply([1.0, 0.0, 0.0]), np.cross(area.axial, [1.0, 0.0, 0.0]), atol=1e-8)

    def test_error_slope_is_cubic(self):
        report = planimeter_check(build_curve("circle", 1024), [0.2, 0.1, 0.05, 0.025])
        assert report.slope >= 2.8

    def test_eps_list_must_decrease(self):
        with pytest.raises(ValidationError):
            planimeter_check(build_curve("circle", 256), [0.1, 0.2, 0.05, 0.025])
        with pytest.raises(ValidationError):
            planimeter_check(build_curve("circle", 256), [0.2, 0.1])

    def test_hatchet_estimate_improves_with_length(self):
        circle = build_curve("circle", 1024)
        short = hatchet_angle(circle, 4.0)
        long = hatchet_angle(circle, 8.0)
        assert short["signed_area"] == pytest.approx(math.pi)
        assert long["error"] < short["error"]

    def test_hatchet_needs_elliptic_monodromy(self):
        with pytest.raises(ValidationError):
            hatchet_angle(build_curve("circle", 512), 0.5)


class TestKlein:
    def test_distance_from_origin(self):
        assert klein_distance([0.0, 0.0], [0.5, 0.0]) == pytest.approx(0.5 * math.log(3.0))
        assert klein_distance([0.5, 0.0], [0.0, 0.0], ell=2.0) == pytest.approx(math.log(3.0))
        assert klein_distance([0.1, 0.2], [0.1, 0.2]) == 0.0

    def test_boundary_points_rejected(self):
        with pytest.raises(ValidationError):
            klein_distance([1.0, 0.0], [0.0, 0.0])

    def test_bicycle_flow_is_a_klein_isometry(self):
        front = build_curve("random_fourier", 512, seed=11, dimension=3)
        assert klein_drift(front, 1.0, [0.3, 0.0, 0.1], [-0.2, 0.4, 0.0]) < 1e-8


class TestAction:
    def test_fixed_directions_are_fixed(self):
        element = monodromy_element(build_curve("circle", 1024), 0.5)
        attracting, repelling = sorted(fixed_points(element), key=lambda fp: abs(derivative_at_fixed_point(element, fp)))
        np.testing.assert_allclose(act_on_sphere(element, attracting), attracting, atol=1e-8)
        np.testing.assert_allclose(act_on_sphere(inverse_lorentz(element), repelling), repelling, atol=1e-8)

    def test_klein_ball_is_preserved(self):
        element = monodromy_element(build_curve("trefoil", 512), 0.7)
        image = act_on_sphere(element, [0.2, -0.1, 0.3])
        assert np.linalg.norm(image) < 1.0

    def test_transport_form_on_an_open_front(self):
        report = transport_check(build_curve("helix", 1024), 1.0, [0.0, 0.6, 0.8])
        assert report.jacobian.shape == (2, 3)
        assert report.residual < 1e-3


class TestReductionFlow:
    def test_spatial_lift_stays_finite(self):
        lift = lorentz_lift_monodromy(build_curve("trefoil", 512), 1.0)
        assert np.all(np.isfinite(lift.matrix))
        assert lift.j_residual < 1e-10

    @pytest.mark.parametrize("curve_id, ell", [("trefoil", 1.0), ("ellipse", 0.4)])
    def test_sl2_path_covers_the_lift(self, curve_id, ell):
        front = build_curve(curve_id, 512)
        g = reduction_flow(front, ell, steps=2000).final
        lift = lorentz_lift_flow(front, ell, steps=2000).final
        scale = max(1.0, float(np.max(np.abs(lift))))
        np.testing.assert_allclose(lorentz_from_reduction(g, front.dimension) / scale, lift / scale, atol=1e-9)

    def test_generators_need_plane_or_space(self):
        with pytest.raises(ValidationError):
            reduction_flow(build_curve("circle", 64, dimension=4), 1.0)
