# tests/utils/test_integrable.py
import math

import numpy as np
import pytest

from utils.curves import build_curve, frenet_data, resample_arclength
from utils.errors import ValidationError
from utils.integrable import (
    WegnerParams,
    akns_integrate,
    buckled_ring_residual,
    darboux_bike_check,
    darboux_lambda_sweep,
    darboux_transform,
    planar_filament_step,
    q_from_curve,
    soliton_check,
    stp_curve,
    stp_frenet_check,
    wegner_curve,
)


@pytest.fixture
def grid():
    return np.linspace(0.0, 4.0 * math.pi, 2049)


class TestAkns:
    def test_zero_potential_gives_diagonal_phases(self):
        t = np.linspace(0.0, 2.0, 201)
        frame = akns_integrate(0.0, 1.0, t, augmented=False)
        expected = np.zeros((len(t), 2, 2), dtype=complex)
        expected[:, 0, 0] = np.exp(0.5j * t)
        expected[:, 1, 1] = np.exp(-0.5j * t)
        np.testing.assert_allclose(frame.phi, expected, atol=1e-9)
        assert frame.psi is None

    def test_frame_stays_in_su2(self, grid):
        frame = akns_integrate(lambda ts: 0.5 * np.exp(0.3j * ts), 0.7, grid)
        assert frame.unitarity_defect < 1e-12
        assert frame.det_defect < 1e-12

    def test_stp_curve_of_constant_potential(self, grid):
        # κ = 2|q| = 1 and τ = Im(q_t/q) − λ = −0.3
        report = stp_frenet_check(akns_integrate(0.5, 0.3, grid))
        assert report["kappa_error"] < 1e-5
        assert report["tau_error"] < 1e-3

    def test_stp_curve_is_unit_speed(self, grid):
        curve, basis = stp_curve(akns_integrate(0.5, 0.0, grid))
        assert basis.shape == (3, 2, 2)
        np.testing.assert_allclose(np.linalg.norm(curve.tangents, axis=1), 1.0, atol=1e-12)

    def test_rejects_bad_inputs(self, grid):
        with pytest.raises(ValidationError):
            akns_integrate(0.5, 0.0, grid, phi0=2.0 * np.eye(2))
        with pytest.raises(ValidationError):
            akns_integrate(0.5, 0.1j, grid)
        with pytest.raises(ValidationError):
            akns_integrate(0.5, 0.0, np.array([0.0, 0.1, 0.3, 0.4]))
        with pytest.raises(ValidationError):
            stp_frenet_check(akns_integrate(0.0, 0.3, grid))
        with pytest.raises(ValidationError):
            stp_curve(akns_integrate(0.5, 0.0, grid, augmented=False))


class TestPotentialFromCurve:
    def test_unit_circle(self):
        q = q_from_curve(build_curve("circle", 1024))
        np.testing.assert_allclose(q.values, 0.5, atol=1e-8)
        np.testing.assert_allclose(q.curvature, 1.0, atol=1e-8)

    def test_helix_phase_winds_with_torsion(self):
        q = q_from_curve(build_curve("helix", 1024))
        np.testing.assert_allclose(np.abs(q.values), 0.25, atol=1e-5)
        phase = np.unwrap(np.angle(q.values))
        assert phase[-1] == pytest.approx(0.5 * q.t[-1], rel=1e-3)

    def test_line_has_no_potential_in_space(self):
        with pytest.raises(ValidationError):
            q_from_curve(build_curve("line", 64, dimension=3))


class TestDarboux:
    def test_distance_law(self, grid):
        data = darboux_transform(akns_integrate(0.5, 0.0, grid), 1j, [1.0, 0.0])
        assert data.expected_distance == pytest.approx(2.0)
        assert data.residuals["distance_law"] < 1e-9
        assert data.residuals["closed_form"] < 1e-9
        assert data.residuals["projector"] < 1e-12
        assert data.residuals["akns"] < 1e-8

    def test_spinor_scale_does_not_matter(self, grid):
        frame = akns_integrate(0.5, 0.2, grid)
        a = darboux_transform(frame, 0.5 + 1j, [1.0, 0.5j])
        b = darboux_transform(frame, 0.5 + 1j, [3.0, 1.5j])
        np.testing.assert_allclose(a.gamma_tilde, b.gamma_tilde, atol=1e-10)
        np.testing.assert_allclose(a.q_tilde, b.q_tilde, atol=1e-10)

    def test_lambda_sweep_keeps_the_product(self, grid):
        rows = darboux_lambda_sweep(0.5, 1j, [1.0, 0.0], [0.0, 0.5, -1.0], grid)
        assert [r["lambda"] for r in rows] == [0.0, 0.5, -1.0]
        assert max(r["relative_error"] for r in rows) < 1e-9

    def test_bicycle_correspondence_at_lambda_zero(self, grid):
        report = darboux_bike_check(akns_integrate(0.5, 0.0, grid), 1.0, directions=[(0.0, 0.0, 1.0)])
        assert report.ell == 1.0
        assert report.passed(1e-6)
        assert report.partner_gap < 1e-5
        assert report.to_json()["directions"][0]["direction_error"] < 1e-10

    def test_rejects_bad_inputs(self, grid):
        frame = akns_integrate(0.5, 0.0, grid)
        with pytest.raises(ValidationError):
            darboux_transform(frame, 0.5, [1.0, 0.0])
        with pytest.raises(ValidationError):
            darboux_transform(frame, 1j, [0.0, 0.0])
        with pytest.raises(ValidationError):
            darboux_transform(akns_integrate(0.5, 0.0, grid, augmented=False), 1j, [1.0, 0.0])
        with pytest.raises(ValidationError):
            darboux_bike_check(akns_integrate(0.5, 0.3, grid), 1.0)
        with pytest.raises(ValidationError):
            darboux_bike_check(frame, 0.0)


class TestWegner:
    def test_elastic_parameters(self):
        linear = WegnerParams("linear", 1.0, 0.2)
        circular = WegnerParams("circular", 0.1, 0.2, 0.1)
        assert linear.lambda_el == pytest.approx(0.4)
        assert linear.mu_el == 0.0
        assert circular.lambda_el == pytest.approx(0.0, abs=1e-12)
        assert circular.mu_el == pytest.approx(0.8)

    def test_unknown_family(self):
        with pytest.raises(ValidationError):
            WegnerParams("spiral", 1.0, 0.2)

    @pytest.mark.parametrize("curve_id", ["wegner_linear", "wegner_circular"])
    def test_relation_is_conserved_and_curve_is_elastic(self, curve_id):
        curve = build_curve(curve_id, 4096)
        p = curve.params
        assert p["relation_residual"] < 1e-8
        assert buckled_ring_residual(curve, p["lambda_el"], p["mu_el"]) < 1e-5

    def test_branches_are_mirror_images(self):
        params = WegnerParams("linear", 1.0, 0.2)
        upper = wegner_curve(params, 0.0, samples=1024, branch=1)
        lower = wegner_curve(params, 0.0, samples=1024, branch=-1)
        np.testing.assert_allclose(lower.points[:, 0], upper.points[:, 0], atol=1e-12)
        np.testing.assert_allclose(lower.points[:, 1], -upper.points[:, 1], atol=1e-12)

    def test_flat_circular_family_is_a_circle(self):
        params = WegnerParams("circular", 0.0, 0.5, 0.0)
        curve = wegner_curve(params, 1.0, samples=4001, length=6.0)
        np.testing.assert_allclose(params.curvature_law(curve.points), 1.0)
        assert buckled_ring_residual(curve, params.lambda_el, params.mu_el) < 1e-6

    def test_start_outside_the_relation(self):
        with pytest.raises(ValidationError):
            wegner_curve(WegnerParams("linear", 1.0, 0.2), 2.0)
        with pytest.raises(ValidationError):
            wegner_curve(WegnerParams("circular", 0.1, 0.2, 0.1), -1.0)


class TestBuckledRings:
    def test_circle_solves_the_elastic_equation(self):
        # κ = 1: ½κ³ + λκ − μ vanishes for μ = ½ + λ
        assert buckled_ring_residual(build_curve("circle", 1024), 0.3, 0.8) < 1e-6

    def test_wrong_multiplier_is_seen(self):
        assert buckled_ring_residual(build_curve("circle", 1024), 0.3, 0.0) == pytest.approx(0.8, abs=1e-6)

    def test_space_curves_rejected(self):
        with pytest.raises(ValidationError):
            buckled_ring_residual(build_curve("trefoil", 256), 0.0, 0.0)


class TestFilamentFlow:
    def test_circle_only_slides_along_itself(self):
        circle = build_curve("circle", 512)
        stepped = planar_filament_step(circle, 1e-3)
        assert stepped.closed
        assert stepped.sample_count == circle.sample_count
        np.testing.assert_allclose(np.linalg.norm(stepped.points, axis=1), 1.0, atol=1e-6)
        np.testing.assert_allclose(frenet_data(stepped).curvature, 1.0, atol=1e-5)

    def test_circular_ring_is_a_soliton(self):
        report = soliton_check(build_curve("wegner_circular", 4096), 1e-4)
        assert report.soliton

    def test_ellipse_is_not_a_soliton(self):
        ellipse = resample_arclength(build_curve("ellipse", 1024), 1024)
        report = soliton_check(ellipse, 1e-4)
        assert not report.soliton
        assert report.to_dict()["soliton"] is False
