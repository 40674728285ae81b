# tests/utils/test_correspondence.py
import math

import numpy as np
import pytest

from utils.correspondence import (
    GammaKN,
    bianchi_check,
    bicycle_partner,
    butterfly_complete,
    butterfly_map,
    ell_kn,
    gamma_kn,
    glide_reflect,
    monodromy_conjugacy_check,
    rotation_number_table,
    rotation_numbers,
    shift_law_check,
    verify_correspondence,
    zindler_family_report,
    zindler_verify,
)
from utils.curves import build_curve
from utils.errors import ValidationError


class TestPointGeometry:
    def test_glide_reflection(self):
        np.testing.assert_allclose(glide_reflect([0.0, 0.0], [1.0, 0.0], [0.0, 1.0]), [1.0, -1.0])

    def test_glide_needs_distinct_points(self):
        with pytest.raises(ValidationError):
            glide_reflect([1.0, 1.0], [1.0, 1.0], [0.0, 0.0])

    def test_butterfly_has_equal_opposite_sides(self):
        fly = butterfly_complete([0.0, 0.0, 0.0], [1.0, 0.5, 0.2], [2.0, 0.1, -0.3])
        assert not fly.degenerate
        assert fly.side_residual() < 1e-12
        assert fly.planarity_residual() < 1e-12

    def test_degenerate_butterfly_needs_axis(self):
        with pytest.raises(ValidationError):
            butterfly_complete([1.0, 0.0], [0.0, 0.0], [1.0, 0.0])
        fly = butterfly_complete([1.0, 0.0], [0.0, 0.0], [1.0, 0.0], axis_hint=[0.0, 1.0])
        assert fly.degenerate

    def test_butterfly_map_fixes_the_chord_direction(self):
        # z = 1 is the degenerate fold: both bikes along the chord
        assert abs(butterfly_map(0.7, 0.3, 1.0) - 1.0) < 1e-12


class TestPartners:
    def test_partner_of_circle_is_in_correspondence(self):
        front = build_curve("circle", 1024)
        partner = bicycle_partner(front, 0.5, [math.cos(0.4), math.sin(0.4)])
        res = verify_correspondence(front, partner, 1.0)
        assert res.chord < 1e-12
        assert res.glide < 1e-12
        assert res.passed()

    def test_trivial_monodromy_partner_closes_onto_gamma_kn(self):
        circle = build_curve("circle", 2048, n_folds=2)
        partner = bicycle_partner(circle, ell_kn(1, 2), [1.0, 0.0])
        assert partner.closed
        np.testing.assert_allclose(partner.points, gamma_kn(1, 2, 2048).points, atol=1e-7)

    def test_gamma_kn_is_partner_of_the_multi_fold_circle(self):
        circle = build_curve("circle", 2048, n_folds=2)
        res = verify_correspondence(circle, gamma_kn(1, 2, 2048), 2.0 * ell_kn(1, 2))
        assert max(res.chord, res.angle, res.glide) < 1e-6

    def test_grid_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            verify_correspondence(build_curve("circle", 64), build_curve("circle", 128), 1.0)

    def test_bianchi_permutability(self):
        circle = build_curve("circle", 2048, n_folds=2)
        B = bicycle_partner(circle, 0.3, [0.0, 1.0])
        C = bicycle_partner(B, 0.7, [1.0, 0.0])
        report = bianchi_check(circle, B, C, 0.3, 0.7)
        assert report.degenerate_samples == []
        assert report.ad.chord < 1e-10
        assert report.cd.chord < 1e-10
        assert report.ad.glide < 1e-4
        assert report.butterfly_map_residual < 1e-10

    def test_bianchi_needs_distinct_lengths(self):
        circle = build_curve("circle", 256)
        B = bicycle_partner(circle, 0.3, [0.0, 1.0])
        with pytest.raises(ValidationError):
            bianchi_check(circle, B, B, 0.3, 0.3)

    def test_partners_share_monodromy_traces(self):
        rows = monodromy_conjugacy_check(gamma_kn(1, 2, 2048), build_curve("circle", 2048, n_folds=2), [0.3, 0.7, ell_kn(1, 2), 1.5])
        assert [r["lambda"] for r in rows] == [0.3, 0.7, pytest.approx(ell_kn(1, 2)), 1.5]
        assert max(r["relative_error"] for r in rows) < 1e-6
        assert max(r["sl2_error"] for r in rows) < 1e-6


class TestGammaKN:
    def test_ell_kn(self):
        assert ell_kn(1, 2) == pytest.approx(2.0 / math.sqrt(3.0))
        with pytest.raises(ValidationError):
            ell_kn(2, 2)

    def test_closed_form_is_unit_speed_and_closes(self):
        c = gamma_kn(1, 3, 512)
        assert c.closed
        assert c.period == pytest.approx(6.0 * math.pi)
        np.testing.assert_allclose(np.linalg.norm(c.sample_velocities(), axis=1), 1.0, atol=1e-12)

    def test_starting_point(self):
        g = GammaKN(1, 2)
        np.testing.assert_allclose(g(np.array([0.0]))[0], [[1.0 + 2.0 * g.ell, 0.0]])

    def test_non_coprime_pair_rejected(self):
        with pytest.raises(ValidationError):
            GammaKN(2, 4)


class TestRotationNumbers:
    def test_one_four_roots(self):
        roots = rotation_numbers(1, 4)
        assert len(roots) == 2
        for rho in roots:
            assert math.tan(math.pi * rho) ** 2 == pytest.approx(5.0, abs=1e-9)
        assert roots[0] == pytest.approx(0.3661, abs=1e-4)
        assert roots[1] == pytest.approx(0.6339, abs=1e-4)

    def test_one_three_root_is_half(self):
        assert rotation_numbers(1, 3) == [pytest.approx(0.5, abs=1e-12)]

    def test_table(self):
        rows = rotation_number_table(4)
        assert [(r["k"], r["n"]) for r in rows] == [(1, 3), (1, 4), (1, 4)]
        assert rows[0]["tan2"] == float("inf")

    @pytest.mark.parametrize("k, n", [(2, 4), (3, 2), (3, 4), (0, 5)])
    def test_inadmissible_pairs_have_none(self, k, n):
        assert rotation_numbers(k, n) == []


class TestZindler:
    def test_one_four_family_passes(self):
        report = zindler_family_report(1, 4, 4096)
        assert report["passed"]
        assert len(report["chord"]) == 2

    def test_last_family_member_is_not_zindler(self):
        # same rotation numbers, same length: the certificate must not pass for Γ_{3,4}
        curve = gamma_kn(3, 4, 4096)
        for rho in rotation_numbers(1, 4):
            assert not zindler_verify(curve, rho).passed
        report = zindler_family_report(3, 4, 4096)
        assert report["rho"] == []
        assert not report["passed"]

    def test_wrong_rotation_number_fails(self):
        cert = zindler_verify(gamma_kn(1, 4, 2048), 0.25)
        assert not cert.passed

    def test_rejects_bad_input(self):
        with pytest.raises(ValidationError):
            zindler_verify(gamma_kn(1, 4, 256), 1.5)
        with pytest.raises(ValidationError):
            zindler_verify(build_curve("helix", 256), 0.5)

    def test_shift_law(self):
        result = shift_law_check(1, 2, 0.5, 1024)
        assert result["gamma"] == pytest.approx(math.pi / 3.0)
        assert result["residual"] < 1e-9

    def test_shift_law_range(self):
        with pytest.raises(ValidationError):
            shift_law_check(1, 2, 1.5)
