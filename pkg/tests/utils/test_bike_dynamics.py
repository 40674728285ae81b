# tests/utils/test_bike_dynamics.py
import math

import numpy as np
import pytest

from utils.bike_dynamics import (
    ProjectiveCoord,
    chart_to_sphere,
    circle_front_solution,
    find_unstable_periodic,
    integrate_bicycle_sphere,
    integrate_riccati_planar,
    line_front_solution,
    log_multiplier,
    log_multiplier_taylor,
    lorentz_lift_monodromy,
    period_map_contraction,
    roll_hyperbolic,
    roll_sphere,
    sphere_to_chart,
)
from utils.curves import build_curve
from utils.errors import ContractionError, ValidationError


def _direction(theta):
    return np.array([math.cos(theta), math.sin(theta)])


class TestSpherePicture:
    def test_line_front_matches_closed_form(self):
        front = build_curve("line", 1001, T=5.0)
        traj = integrate_bicycle_sphere(front, 1.0, _direction(2.0))
        expected = line_front_solution(1.0, 2.0, traj.t)
        np.testing.assert_allclose(traj.r, expected, atol=1e-8)

    @pytest.mark.parametrize("ell", [0.5, 2.0])
    def test_circle_front_matches_closed_form(self, ell):
        front = build_curve("circle", 2048)
        traj = integrate_bicycle_sphere(front, ell, _direction(0.7))
        expected = circle_front_solution(ell, 0.7, traj.t)
        np.testing.assert_allclose(traj.r, expected, atol=1e-8)

    def test_direction_stays_on_sphere(self):
        traj = integrate_bicycle_sphere(build_curve("trefoil", 512), 0.8, [0.0, 0.0, 1.0])
        assert traj.norm_drift < 1e-12
        assert traj.dimension == 3

    def test_direction_rates_solve_the_equation(self):
        traj = integrate_bicycle_sphere(build_curve("circle", 512), 1.0, _direction(0.3))
        assert np.max(np.abs(np.einsum("ij,ij->i", traj.direction_rates(), traj.r))) < 1e-12

    def test_batch_of_directions(self):
        starts = np.array([_direction(0.1), _direction(2.5)])
        traj = integrate_bicycle_sphere(build_curve("ellipse", 256), 1.0, starts)
        assert traj.r.shape == (257, 2, 2)
        single = integrate_bicycle_sphere(build_curve("ellipse", 256), 1.0, starts[1])
        np.testing.assert_allclose(traj.r[:, 1], single.r, atol=1e-12)

    def test_rear_track_is_front_plus_ell_r(self):
        traj = integrate_bicycle_sphere(build_curve("circle", 128), 0.5, _direction(0.0))
        np.testing.assert_allclose(traj.rear, traj.front_points + 0.5 * traj.r)
        assert set(traj.rows()[0]) == {"t", "r1", "r2", "gamma1", "gamma2"}

    def test_rejects_bad_inputs(self):
        front = build_curve("line", 64)
        with pytest.raises(ValidationError):
            integrate_bicycle_sphere(front, 0.0, _direction(0.0))
        with pytest.raises(ValidationError):
            integrate_bicycle_sphere(front, 1.0, [2.0, 0.0])
        with pytest.raises(ValidationError):
            integrate_bicycle_sphere(front, 1.0, _direction(0.0), t1=20.0)
        with pytest.raises(ValidationError):
            integrate_bicycle_sphere(front, 1j, _direction(0.0))


class TestCharts:
    def test_chart_round_trip_and_infinity(self):
        r = _direction(1.1)
        np.testing.assert_allclose(chart_to_sphere(sphere_to_chart(r, "planar_fixed")), r, atol=1e-14)
        np.testing.assert_allclose(chart_to_sphere(ProjectiveCoord.infinity("planar_fixed")), [-1.0, 0.0])
        far = sphere_to_chart(_direction(math.pi - 1e-3), "planar_fixed")
        assert far.swapped

    def test_unknown_chart(self):
        with pytest.raises(ValidationError):
            ProjectiveCoord(0.0, "nowhere")

    def test_planar_riccati_agrees_with_sphere_flow(self):
        front = build_curve("circle", 2048)
        r0 = _direction(2.9)
        chart = integrate_riccati_planar(front, 0.5, "planar_fixed", sphere_to_chart(r0, "planar_fixed"))
        sphere = integrate_bicycle_sphere(front, 0.5, r0)
        np.testing.assert_allclose(chart.to_sphere(), sphere.r, atol=1e-7)

    def test_planar_riccati_requires_planar_front(self):
        with pytest.raises(ValidationError):
            integrate_riccati_planar(build_curve("trefoil", 64), 1.0, "planar_fixed", ProjectiveCoord(0.0, "planar_fixed"))


class TestLorentzAndRolling:
    def test_lift_stays_in_group(self):
        lift = lorentz_lift_monodromy(build_curve("trefoil", 512), 1.0)
        assert lift.n == 3
        assert lift.j_residual < 1e-10

    def test_hyperbolic_rolling_is_the_lift(self):
        front = build_curve("random_fourier", 512, seed=4, dimension=3)
        gap = np.max(np.abs(roll_hyperbolic(front, 1.0).matrix - lorentz_lift_monodromy(front, 1.0).matrix))
        assert gap < 1e-12

    def test_sphere_rolling_keeps_arclength(self):
        rolled = roll_sphere(build_curve("circle", 1024), 0.7)
        assert rolled.front_length == pytest.approx(2.0 * math.pi, rel=1e-6)
        assert rolled.length_residual < 1e-6


class TestPeriodicSolution:
    @pytest.mark.parametrize("ell", [0.1, 0.5])
    def test_circle_log_multiplier(self, ell):
        value = log_multiplier(build_curve("circle", 1024), ell)
        assert abs(value - 2.0 * math.pi * math.sqrt(1.0 - ell * ell)) < 1e-7

    def test_zero_ell_is_the_length(self):
        assert log_multiplier(build_curve("circle", 256, radius=2.0), 0.0).real == pytest.approx(4.0 * math.pi)

    def test_circle_periodic_solution_is_constant(self):
        sol = find_unstable_periodic(build_curve("circle", 512), 0.5)
        expected = 2.0 - math.sqrt(3.0)
        np.testing.assert_allclose(sol.Z, expected, atol=1e-8)
        assert sol.max_abs < 1.0
        assert sol.multiplier_residual < 1e-6

    def test_taylor_coefficients_of_circle(self):
        coeffs = log_multiplier_taylor(build_curve("circle", 1024), order=2)
        assert coeffs[0].real == pytest.approx(2.0 * math.pi, abs=1e-6)
        assert abs(coeffs[1]) < 1e-4
        assert coeffs[2].real == pytest.approx(-math.pi, abs=1e-4)

    def test_elliptic_regime_raises_contraction_error(self):
        with pytest.raises(ContractionError) as info:
            find_unstable_periodic(build_curve("circle", 256), 2.0)
        assert info.value.ell == 2.0

    def test_contraction_report(self):
        report = period_map_contraction(build_curve("circle", 512), 0.5, seeds=20, rng=1)
        assert report.disc_invariant
        assert report.factor < 1.0
        assert report.to_dict()["seeds"] == 20

    def test_open_front_rejected(self):
        with pytest.raises(ValidationError):
            log_multiplier(build_curve("helix", 256), 0.2)
