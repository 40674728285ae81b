# tests/utils/test_integrators.py
import math

import numpy as np
import pytest
from scipy import linalg

from utils.errors import NumericalDiagnosticError, ValidationError
from utils.integrators import (
    group_defect,
    magnus_flow,
    normalize_rows,
    rk4_flow,
    signature_matrix,
    unitary_correction,
)


def _no_coefficients(ts):
    return np.zeros((len(ts), 1))


def test_rk4_exponential_growth():
    flow = rk4_flow(lambda c, y: y, _no_coefficients, np.array([1.0]), 0.0, 1.0, 100)
    assert flow.final[0] == pytest.approx(math.e, rel=1e-8)
    assert len(flow.t) == 101
    assert flow.states.shape == (101, 1)


def test_rk4_uses_tabulated_coefficients():
    # y' = cos t with the coefficient table carrying cos on the half-step grid
    flow = rk4_flow(lambda c, y: np.array([c[0]]), lambda ts: np.cos(ts)[:, None], np.array([0.0]), 0.0, math.pi / 2, 64)
    assert flow.final[0] == pytest.approx(1.0, abs=1e-9)


def test_rk4_richardson_estimate_is_small():
    flow = rk4_flow(lambda c, y: -y, _no_coefficients, np.array([1.0]), 0.0, 2.0, 40, richardson=True)
    assert flow.error_estimate is not None
    assert 0.0 <= flow.error_estimate < 1e-8
    assert abs(flow.final[0] - math.exp(-2.0)) < 1e-7


def test_zero_steps_returns_initial_state():
    flow = rk4_flow(lambda c, y: y, _no_coefficients, np.array([2.0, 3.0]), 0.0, 1.0, 0)
    np.testing.assert_array_equal(flow.final, [2.0, 3.0])


def test_negative_steps_rejected():
    with pytest.raises(ValidationError):
        rk4_flow(lambda c, y: y, _no_coefficients, np.array([1.0]), 0.0, 1.0, -1)


def test_projection_keeps_unit_vectors():
    rot = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    flow = rk4_flow(lambda c, y: rot @ y, _no_coefficients, np.array([1.0, 0.0, 0.0]), 0.0, 10.0, 50, project=normalize_rows)
    np.testing.assert_allclose(np.linalg.norm(flow.states, axis=1), 1.0, atol=1e-14)


def test_unitary_correction_lands_in_su2():
    rng = np.random.default_rng(3)
    noise = 1e-4 * (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    m = unitary_correction(np.eye(2) + noise)
    np.testing.assert_allclose(m.conj().T @ m, np.eye(2), atol=1e-7)
    assert abs(np.linalg.det(m) - 1.0) < 1e-12


def _boost_generator(rate: float) -> np.ndarray:
    gen = np.zeros((3, 3))
    gen[0, 2] = gen[2, 0] = rate
    return gen


class TestMagnusFlow:
    def test_large_boost_stays_in_the_group(self):
        gen = _boost_generator(1.0)
        flow = magnus_flow(lambda ts: np.broadcast_to(gen, (len(ts), 3, 3)), np.eye(3), 0.0, 40.0, 100)
        exact = linalg.expm(40.0 * gen)
        assert exact[0, 0] > 1e17
        np.testing.assert_allclose(flow.final / exact[0, 0], exact / exact[0, 0], atol=1e-12)
        assert group_defect(flow.final, signature_matrix(2)) < 1e-12

    def test_commuting_generators_integrate_to_a_rotation(self):
        rot = np.array([[0.0, -1.0], [1.0, 0.0]])
        flow = magnus_flow(lambda ts: np.cos(ts)[:, None, None] * rot, np.eye(2), 0.0, math.pi / 2, 200)
        # rotation angle ∫ cos over [0, π/2] = 1
        np.testing.assert_allclose(flow.final, linalg.expm(rot), atol=1e-9)
        assert len(flow.t) == 201

    def test_overflow_is_a_numerical_failure(self):
        gen = _boost_generator(20.0)
        with pytest.raises(NumericalDiagnosticError):
            magnus_flow(lambda ts: np.broadcast_to(gen, (len(ts), 3, 3)), np.eye(3), 0.0, 40.0, 40)

    def test_zero_steps(self):
        flow = magnus_flow(lambda ts: np.zeros((len(ts), 2, 2)), np.eye(2), 0.0, 1.0, 0)
        np.testing.assert_array_equal(flow.final, np.eye(2))


def test_group_defect_is_relative():
    j = signature_matrix(2)
    boost = linalg.expm(30.0 * _boost_generator(1.0))
    assert group_defect(boost, j) < 1e-13
    assert group_defect(np.diag([2.0, 1.0, 1.0]), j) == pytest.approx(3.0 / 4.0)
