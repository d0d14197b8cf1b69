import math

import numpy as np
import pytest
from scipy.integrate import quad_vec

from rotoseen import (CoincidenceError, DomainError, NonConvergenceError, PhysParams,
                      rotation_matrix)
from rotoseen.expansion import ray_fits
from rotoseen.oseen_tensor import oseen_velocity_tensors
from rotoseen.scalar_kernels import heat_kernel
from rotoseen.stokes_rotating import TimeQuadratureConfig, gamma, stokes_T, z_at_origin, z_tensor

from .helpers import fd_grad, random_points


# ----------------------------------------------------------------------- T

def test_T_trace_is_twice_heat_kernel(rng):
    for x, t in zip(random_points(rng, 50, 0.01, 5), rng.uniform(0.05, 5, 50)):
        assert np.trace(stokes_T(x, t)) == pytest.approx(2 * heat_kernel(x, t), rel=1e-10, abs=1e-16)


def test_T_symmetric(rng):
    for x in random_points(rng, 10):
        T = stokes_T(x, 0.7)
        assert np.array_equal(T, T.T)


def test_T_spatial_derivative_matches_fd(rng):
    for x, t in zip(random_points(rng, 20, 0.1, 4), rng.uniform(0.2, 3, 20)):
        d = np.stack([stokes_T(x, t, a) for a in ((1, 0, 0), (0, 1, 0), (0, 0, 1))], axis=-1)
        fd = fd_grad(lambda y: stokes_T(y, t), x)
        np.testing.assert_allclose(d, fd, rtol=1e-5, atol=1e-6 * np.max(np.abs(d)))


def test_T_time_derivative_matches_fd():
    x = np.array([0.7, -0.4, 1.1])
    for t in (0.2, 1.0, 3.0):
        h = 1e-6 * t
        fd = (stokes_T(x, t + h) - stokes_T(x, t - h)) / (2 * h)
        np.testing.assert_allclose(stokes_T(x, t, l=1), fd, rtol=1e-6, atol=1e-9 * np.max(np.abs(fd)))


def test_T_envelope_slope():
    r = np.array([5.0, 10.0, 20.0, 40.0])
    vals = [abs(stokes_T([0, ri, 0], 1.0)[0, 0]) for ri in r]
    assert np.polyfit(np.log(r * r + 1), np.log(vals), 1)[0] <= -1.4


def test_T_domain_errors():
    with pytest.raises(DomainError):
        stokes_T([1, 0, 0], 0.0)
    with pytest.raises(DomainError):
        stokes_T([1, 0, 0], 1.0, (1, 0, 0), l=1)


# ------------------------------------------------------------------- Gamma

def test_gamma_first_column_at_origin(p, rng):
    for x, t in zip(random_points(rng, 10), rng.uniform(0.1, 10, 10)):
        np.testing.assert_allclose(gamma(x, np.zeros(3), t, p)[:, 0],
                                   stokes_T(x - p.tau * t * np.eye(3)[0], t)[:, 0], rtol=1e-14, atol=1e-300)


def test_gamma_full_period(p):
    x, y = np.array([1.0, 0.5, -0.3]), np.array([0.2, 0.4, 0.1])
    t = 2 * math.pi / abs(p.rho)
    np.testing.assert_allclose(gamma(x, y, t, p), stokes_T(x - p.tau * t * np.eye(3)[0] - y, t),
                               rtol=1e-12, atol=1e-18)


def test_gamma_matches_definition(p):
    x, y, t = np.array([1.0, 0.5, -0.3]), np.array([0.2, 0.4, 0.1]), 1.3
    R = rotation_matrix(-t, p)
    expect = stokes_T(x - p.tau * t * np.eye(3)[0] - R @ y, t) @ R
    np.testing.assert_allclose(gamma(x, y, t, p), expect, rtol=1e-13)


def _gamma_envelope_samples(p, ts):
    x, y = np.array([1.0, 1.0, 0.0]), np.array([0.3, 0.2, 0.1])
    abscissa, vals = [], []
    for t in ts:
        z = x - p.tau * t * np.eye(3)[0] - rotation_matrix(-t, p) @ y
        abscissa.append(z @ z + t)
        vals.append(np.max(np.abs(gamma(x, y, t, p))))
    return np.log(abscissa), np.log(vals)


def test_gamma_envelope_along_time(p):
    # bounded ratio to the envelope over the whole time axis ...
    a, v = _gamma_envelope_samples(p, np.geomspace(1e-2, 1e3, 31))
    assert np.max(np.exp(v + 1.5 * a)) < 1.0
    # ... and the envelope rate once the drift dominates
    a, v = _gamma_envelope_samples(p, [10.0, 20.0, 40.0, 80.0, 160.0])
    assert np.polyfit(a, v, 1)[0] <= -1.4


def test_gamma_x_derivative_matches_fd(p, rng):
    y = np.array([0.2, -0.1, 0.3])
    for x in random_points(rng, 10, 0.3, 3):
        d = np.stack([gamma(x, y, 0.8, p, a) for a in ((1, 0, 0), (0, 1, 0), (0, 0, 1))], axis=-1)
        fd = fd_grad(lambda z: gamma(z, y, 0.8, p), x)
        np.testing.assert_allclose(d, fd, rtol=1e-5, atol=1e-6 * np.max(np.abs(d)))


# ----------------------------------------------------------------------- Z

@pytest.mark.parametrize("x", [(5, 0, 0), (-5, 0, 0), (0, 5, 0), (3, 4, 0)])
def test_Z_first_column_is_oseen(p, x):
    z = z_tensor(x, [0, 0, 0], p).value[:, 0]
    e = oseen_velocity_tensors(np.array(x, float), p)[0][:, 0]
    mask = np.abs(e) > 1e-12
    assert np.all(np.abs(z[mask] - e[mask]) <= 1e-6 * np.abs(e[mask]))


def _brute_force_Z(x, y, p, T=2000.0):
    # plain adaptive quadrature of the closed-form Gamma over [0, T]
    f = lambda t: gamma(x, y, t, p) if t > 0 else np.zeros((3, 3))
    pts = [1e-3, 1e-2, 0.1, 1.0] + list(np.arange(2.0, 40.0, 2.0))
    edges = [0.0] + pts + [T]
    total = np.zeros((3, 3))
    for a, b in zip(edges[:-1], edges[1:]):
        total += quad_vec(f, a, b, epsabs=1e-13, epsrel=1e-11, limit=4000)[0]
    return total


@pytest.mark.parametrize("x,y", [((2.0, 1.0, 0.5), (0.3, -0.2, 0.1)), ((-1.5, 0.5, 1.0), (0.0, 0.4, -0.3))])
def test_Z_matches_brute_force_quadrature(p, x, y):
    x, y = np.array(x), np.array(y)
    np.testing.assert_allclose(z_tensor(x, y, p).value, _brute_force_Z(x, y, p), atol=1e-7)


def test_Z_axis_antisymmetry(p):
    Z = z_tensor([5, 0, 0], [0, 0, 0], p).value
    assert Z[1, 2] == pytest.approx(-Z[2, 1], rel=1e-12)
    assert Z[1, 1] == pytest.approx(Z[2, 2], rel=1e-12)


def test_Z_near_origin_slope(p):
    hs = np.array([0.5, 0.25, 0.125, 0.0625])
    vals = [abs(z_tensor([h, 0, 0], [0, 0, 0], p).value[0, 0]) for h in hs]
    assert np.polyfit(np.log(hs), np.log(vals), 1)[0] >= -1.2


def test_Z_coincidence_error(p):
    with pytest.raises(CoincidenceError):
        z_tensor([1, 2, 3], [1, 2, 3], p)
    with pytest.raises(CoincidenceError):
        z_at_origin([0, 0, 0], p)


def test_Z_nonconvergence_reported(p):
    cfg = TimeQuadratureConfig(rel_tol=1e-16, abs_tol=1e-300, max_subdivisions=10)
    with pytest.raises(NonConvergenceError) as exc:
        z_tensor([3, 1, 0], [0, 0, 0], p, cfg)
    assert exc.value.estimated_error is not None and exc.value.value is not None


def test_config_validation():
    for kw in (dict(rel_tol=0), dict(abs_tol=-1), dict(max_subdivisions=5), dict(tail_safety=0.5)):
        with pytest.raises(DomainError):
            TimeQuadratureConfig(**kw)


def test_Z_divergence_free(p, rng):
    ys = random_points(rng, 30, 0.1, 1.0)
    xs = random_points(rng, 30, 1.5, 15)
    for x, y in zip(xs, ys):
        g = z_tensor(x, y, p, want_x_grad=True).x_gradient
        assert np.max(np.abs(np.einsum("jkj->k", g))) <= 1e-7


def test_Z_x_gradient_matches_fd(p, rng):
    h = 1e-4
    for x, y in zip(random_points(rng, 20, 1.5, 10), random_points(rng, 20, 0.1, 0.5)):
        g = z_tensor(x, y, p, want_x_grad=True).x_gradient
        fd = fd_grad(lambda z: z_tensor(z, y, p).value, x, h)
        np.testing.assert_allclose(g, fd, atol=1e-5 * np.max(np.abs(g)))


def test_Z_y_gradient_matches_fd(p, rng):
    h = 1e-4
    for x, y in zip(random_points(rng, 20, 1.5, 10), random_points(rng, 20, 0.1, 0.5)):
        g = z_tensor(x, y, p, want_y_grad=True).y_gradient
        fd = fd_grad(lambda w: z_tensor(x, w, p).value, y, h)
        np.testing.assert_allclose(g, fd, atol=1e-5 * np.max(np.abs(g)))


def test_Z_decay_with_source_off_origin(p):
    y = np.array([0.3, -0.4, 0.5])
    fits = ray_fits(lambda x: np.linalg.norm(z_tensor(x, y, p).value))
    assert all(f.slope <= -0.9 for f in fits.values())


def test_Z_error_estimate_is_honest(p):
    x, y = np.array([4.0, -2.0, 1.0]), np.array([0.2, 0.1, -0.3])
    a = z_tensor(x, y, p)
    b = z_tensor(x, y, p, TimeQuadratureConfig(rel_tol=0.5e-9))
    assert a.estimated_error >= 0
    assert np.max(np.abs(a.value - b.value)) <= max(a.estimated_error, 1e-15)


def test_z_at_origin_agrees_with_z_tensor(p, rng):
    for x in random_points(rng, 20, 0.3, 30):
        np.testing.assert_allclose(z_at_origin(x, p), z_tensor(x, [0, 0, 0], p).value, rtol=0, atol=1e-9)


def test_z_at_origin_gradient_agrees(p, rng):
    for x in random_points(rng, 5, 0.5, 20):
        g = z_tensor(x, [0, 0, 0], p, want_x_grad=True).x_gradient
        for l in range(3):
            a = np.eye(3, dtype=int)[l]
            np.testing.assert_allclose(z_at_origin(x, p, alpha=a), g[..., l], atol=1e-9)


def test_z_at_origin_first_column_ignores_rotation(rng):
    for x in random_points(rng, 5, 0.5, 20):
        a = z_at_origin(x, PhysParams(1.0, 1.0))[:, 0]
        b = z_at_origin(x, PhysParams(1.0, 7.0))[:, 0]
        np.testing.assert_allclose(a, b, atol=1e-9)


def test_z_at_origin_rotating_columns_decay(p):
    rays = [(-1, 1, 0), (0, 1, 1), (1, 1, 1), (-1, 1, 1), (1, 2, 0)]
    fits = ray_fits(lambda x: abs(z_at_origin(x, p)[0, 1]), rays=rays)
    assert all(f.slope <= -1.4 for f in fits.values())


def test_z_at_origin_error_output(p):
    val, err = z_at_origin([3.0, 1.0, -1.0], p, return_error=True)
    assert val.shape == (3, 3) and err >= 0
