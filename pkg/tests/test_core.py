import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rotoseen import DomainError, MultiIndex, PhysParams, omega_cross, rotation_matrix, wake_weight
from rotoseen.core import as_point, omega_matrix, rotation_from_angle

coord = st.floats(-50, 50, allow_nan=False)
point = st.tuples(coord, coord, coord)


@pytest.mark.parametrize("tau,rho", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0), (math.inf, 1.0), (1.0, math.nan)])
def test_physparams_rejects_invalid(tau, rho):
    with pytest.raises(DomainError):
        PhysParams(tau, rho)


def test_physparams_negative_rho_allowed():
    p = PhysParams(2.0, -3.0)
    assert p.half_period == pytest.approx(math.pi / 3)
    np.testing.assert_array_equal(p.omega, [-3.0, 0.0, 0.0])


@pytest.mark.parametrize("x,expected", [((0, 0, 0), 1.0), ((1, 0, 0), 1.0), ((-3, 4, 0), 9.0)])
def test_wake_weight_examples(x, expected):
    assert wake_weight(x) == expected


@given(point)
def test_wake_weight_lower_bound(x):
    x = np.array(x)
    s = wake_weight(x)
    assert s >= max(1.0, np.linalg.norm(x) - x[0]) - 1e-12


@given(point, st.tuples(*[st.floats(-5, 5)] * 3))
def test_wake_weight_shift_inequality(x, y):
    # s(x) <= s(x - y)(1 + 2|y|)
    x, y = np.array(x), np.array(y)
    assert 1.0 / wake_weight(x - y) <= (1 + 2 * np.linalg.norm(y)) / wake_weight(x) * (1 + 1e-12)


def test_rotation_examples():
    p = PhysParams(1.0, 1.0)
    np.testing.assert_array_equal(rotation_matrix(0.0, p), np.eye(3))
    np.testing.assert_allclose(rotation_matrix(math.pi, p), np.diag([1.0, -1.0, -1.0]), atol=1e-15)
    np.testing.assert_allclose(rotation_matrix(math.pi / 2, p),
                               [[1, 0, 0], [0, 0, -1], [0, 1, 0]], atol=1e-15)


def test_rotation_group_properties(rng):
    p = PhysParams(1.0, 1.7)
    t = rng.uniform(-20, 20, 100)
    R = rotation_matrix(t, p)
    Rm = rotation_matrix(-t, p)
    np.testing.assert_allclose(R @ Rm, np.broadcast_to(np.eye(3), R.shape), atol=1e-14)
    np.testing.assert_allclose(R @ np.swapaxes(R, -1, -2), np.broadcast_to(np.eye(3), R.shape), atol=1e-14)
    np.testing.assert_allclose(np.linalg.det(R), 1.0, atol=1e-14)
    np.testing.assert_allclose(rotation_matrix(t + 2 * math.pi / abs(p.rho), p), R, atol=1e-12)


def test_rotation_is_exponential_of_omega():
    # d/dt R(t) = Omega R(t), checked by central differences
    p = PhysParams(1.0, 0.8)
    t, h = 0.9, 1e-6
    dR = (rotation_matrix(t + h, p) - rotation_matrix(t - h, p)) / (2 * h)
    np.testing.assert_allclose(dR, omega_matrix(p) @ rotation_matrix(t, p), atol=1e-9)


def test_rotation_from_complex_angle():
    R = rotation_from_angle(np.array(0.3 + 0.2j))
    np.testing.assert_allclose(R @ rotation_from_angle(np.array(-0.3 - 0.2j)), np.eye(3), atol=1e-14)


@pytest.mark.parametrize("x,rho,expected", [((1, 0, 0), 3.0, (0, 0, 0)), ((0, 1, 0), 2.0, (0, 0, 2)),
                                            ((0, 0, 1), 2.0, (0, -2, 0))])
def test_omega_cross_examples(x, rho, expected):
    np.testing.assert_array_equal(omega_cross(x, PhysParams(1.0, rho)), expected)


@given(point)
@settings(max_examples=50)
def test_omega_cross_is_matrix_product(x):
    p = PhysParams(1.0, -1.3)
    np.testing.assert_allclose(omega_cross(x, p), omega_matrix(p) @ np.array(x), atol=1e-12)
    np.testing.assert_allclose(omega_cross(x, p), np.cross(p.omega, x), atol=1e-12)


def test_multi_index():
    assert MultiIndex.of(None).order == 0
    assert MultiIndex.of((1, 0, 1)).axes() == [0, 2]
    assert MultiIndex.unit(1) == (0, 1, 0)
    with pytest.raises(DomainError):
        MultiIndex.of((0, -1, 0))


def test_as_point_validation():
    with pytest.raises(ValueError):
        as_point([1.0, 2.0])
    with pytest.raises(ValueError):
        as_point([1.0, math.nan, 0.0])
