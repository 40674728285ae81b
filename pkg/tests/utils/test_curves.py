# tests/utils/test_curves.py
import math

import numpy as np
import pytest

from utils.curves import (
    Curve,
    build_curve,
    curve_length,
    frenet_data,
    known_curve_ids,
    load_curve_csv,
    resample_arclength,
    save_curve_csv,
    signed_planar_area,
    spectral_derivative,
)
from utils.errors import ValidationError

ELLIPSE_2_1_PERIMETER = 9.688448220547675


def test_circle_is_closed_arclength_curve():
    c = build_curve("circle", 256, radius=2.0)
    assert c.closed
    assert c.arclength
    assert c.sample_count == 256
    assert len(c.t) == 257
    assert c.period == pytest.approx(4.0 * math.pi)
    np.testing.assert_allclose(c.points[-1], c.points[0])


def test_multi_fold_circle_period_scales_with_folds():
    c = build_curve("circle_multi", 512, n_folds=2)
    assert c.period == pytest.approx(4.0 * math.pi)
    assert c.params["n_folds"] == 2


def test_registry_lists_lazy_builders():
    build_curve("circle", 16)
    ids = known_curve_ids()
    for name in ("circle", "ellipse", "helix", "gamma_kn", "wegner_linear", "wegner_circular"):
        assert name in ids


def test_unknown_curve_id_is_rejected():
    with pytest.raises(ValidationError):
        build_curve("no_such_curve", 64)


def test_too_few_samples_rejected():
    with pytest.raises(ValidationError):
        build_curve("circle", 4)


def test_closed_curve_must_close():
    t = np.linspace(0.0, 1.0, 10)
    pts = np.column_stack([t, t**2])
    with pytest.raises(ValidationError):
        Curve(t=t, points=pts, closed=True, period=1.0)


def test_coincident_samples_rejected():
    t = np.linspace(0.0, 1.0, 4)
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    with pytest.raises(ValidationError):
        Curve(t=t, points=pts)


def test_closed_curve_needs_period():
    t = np.linspace(0.0, 2.0 * math.pi, 17)
    pts = np.column_stack([np.cos(t), np.sin(t)])
    with pytest.raises(ValidationError):
        Curve(t=t, points=pts, closed=True)


def test_ellipse_length():
    c = build_curve("ellipse", 256)
    assert curve_length(c) == pytest.approx(ELLIPSE_2_1_PERIMETER, rel=1e-9)


def test_resample_arclength_gives_unit_speed():
    c = resample_arclength(build_curve("ellipse", 256), 512)
    assert c.arclength
    assert c.period == pytest.approx(ELLIPSE_2_1_PERIMETER, rel=1e-9)
    speed = np.linalg.norm(c.sample_velocities(), axis=1)
    np.testing.assert_allclose(speed, 1.0, atol=1e-9)


def test_signed_area_follows_orientation():
    ccw = build_curve("circle", 256, radius=2.0)
    cw = build_curve("circle", 256, clockwise=True)
    assert signed_planar_area(ccw) == pytest.approx(4.0 * math.pi, rel=1e-10)
    assert signed_planar_area(cw) == pytest.approx(-math.pi, rel=1e-10)
    assert signed_planar_area(ccw.reversed()) == pytest.approx(-4.0 * math.pi, rel=1e-10)


def test_signed_area_rejects_space_curves():
    with pytest.raises(ValidationError):
        signed_planar_area(build_curve("trefoil", 64))


class TestFrenet:
    def test_planar_circle_curvature_is_signed(self):
        ccw = frenet_data(build_curve("circle", 256, radius=2.0))
        cw = frenet_data(build_curve("circle", 256, radius=2.0, clockwise=True))
        np.testing.assert_allclose(ccw.curvature, 0.5, atol=1e-6)
        np.testing.assert_allclose(cw.curvature, -0.5, atol=1e-6)
        assert ccw.length == pytest.approx(4.0 * math.pi)

    def test_helix_curvature_and_torsion(self):
        fd = frenet_data(build_curve("helix", 1024, c=1.0))
        np.testing.assert_allclose(fd.curvature, 0.5, atol=1e-6)
        np.testing.assert_allclose(fd.require_torsion(), 0.5, atol=1e-4)

    def test_frame_is_orthonormal(self):
        fd = frenet_data(build_curve("helix", 512, c=0.5))
        frame = np.stack([fd.tangent, fd.normal, fd.binormal], axis=1)
        gram = np.einsum("sij,skj->sik", frame, frame)
        np.testing.assert_allclose(gram, np.broadcast_to(np.eye(3), gram.shape), atol=1e-8)

    def test_planar_circle_in_space_has_no_torsion(self):
        fd = frenet_data(build_curve("circle", 256, dimension=3))
        np.testing.assert_allclose(fd.require_torsion(), 0.0, atol=1e-8)

    def test_non_arclength_curve_is_rejected(self):
        with pytest.raises(ValidationError):
            frenet_data(build_curve("ellipse", 128))


def test_spectral_derivative_of_sine():
    n = 64
    h = 2.0 * math.pi / n
    s = np.arange(n) * h
    np.testing.assert_allclose(spectral_derivative(np.sin(3 * s), h), 3 * np.cos(3 * s), atol=1e-10)
    np.testing.assert_allclose(spectral_derivative(np.sin(3 * s), h, order=2), -9 * np.sin(3 * s), atol=1e-9)


def test_transformed_keeps_length_under_rotation():
    c = build_curve("ellipse", 128)
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    moved = c.transformed(rotation=rot, offset=[3.0, -1.0])
    assert curve_length(moved) == pytest.approx(curve_length(c), rel=1e-12)
    assert signed_planar_area(moved) == pytest.approx(signed_planar_area(c), rel=1e-12)


def test_embedded_pads_coordinates():
    c = build_curve("circle", 32).embedded(4)
    assert c.dimension == 4
    np.testing.assert_array_equal(c.points[:, 2:], 0.0)
    with pytest.raises(ValidationError):
        c.embedded(3)


def test_curve_csv_keeps_metadata(tmp_path):
    c = build_curve("ellipse", 64)
    path = save_curve_csv(c, tmp_path / "front.csv")
    assert (tmp_path / "front.json").exists()
    loaded = load_curve_csv(path)
    assert loaded.closed
    assert loaded.analytic_id == "ellipse"
    np.testing.assert_array_equal(loaded.points, c.points)
    np.testing.assert_array_equal(loaded.t, c.t)


def test_missing_curve_file(tmp_path):
    with pytest.raises(ValidationError):
        load_curve_csv(tmp_path / "absent.csv")
