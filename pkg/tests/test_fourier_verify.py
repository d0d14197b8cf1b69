import math

import numpy as np
import pytest
from scipy import integrate

from rotoseen import DomainError, NonConvergenceError, PhysParams, SingularPointError
from rotoseen.fourier_verify import (C3, AxialColumn, GaussianTestFn, PairingQuadrature, gaussian_fourier,
                                     kernel_function, pairing_check, symbol)
from rotoseen.oseen_tensor import oseen_velocity_tensors


def test_symbol_examples(p):
    assert symbol("newton", [1, 0, 0]) == pytest.approx((2 * math.pi) ** -1.5, rel=1e-15)
    assert abs(symbol("newton", [1, 0, 0])) == pytest.approx(0.0634936, abs=1e-7)
    xi = np.array([0.0, 0.7, -0.4])
    assert symbol("stokes", xi, 0, 0, t=0.5) == pytest.approx(C3 * math.exp(-0.5 * xi @ xi), rel=1e-14)
    q = 1.7
    assert symbol("z_col1", [0, q, 0], 0, 0, p) == pytest.approx(C3 / q ** 2, rel=1e-15)


def test_symbol_closed_forms(p):
    xi = np.array([0.4, -1.1, 0.3])
    q2 = xi @ xi
    den = 1j * p.tau * xi[0] + q2
    assert symbol("oseen", xi, p=p) == pytest.approx(C3 / den)
    assert symbol("resolvent", xi, p=p, lam=2.0) == pytest.approx(C3 / (2.0 + den))
    assert symbol("heat", xi, t=0.3) == pytest.approx(C3 * math.exp(-0.3 * q2))
    proj = -xi[1] * xi[0] / q2
    assert symbol("gamma_col1", xi, 1, 0, p, t=0.3) == pytest.approx(C3 * proj * np.exp(-0.3 * den))


def test_z_symbol_equals_oseen_symbol(p, rng):
    xi = rng.normal(size=(100, 3))
    for j in range(3):
        a = symbol("z_col1", xi, j, 0, p)
        b = symbol("oseen_tensor", xi, j, 0, p)
        np.testing.assert_allclose(a, b, rtol=1e-14)


def test_symbol_errors(p):
    with pytest.raises(SingularPointError):
        symbol("newton", [0, 0, 0])
    with pytest.raises(DomainError):
        symbol("heat", [1, 0, 0])
    with pytest.raises(DomainError):
        symbol("resolvent", [1, 0, 0], lam=0.0)
    with pytest.raises(DomainError):
        symbol("nonsense", [1, 0, 0])
    assert symbol("heat", [0, 0, 0], t=1.0) == pytest.approx(C3)


def test_gaussian_fourier_examples(rng):
    phi0 = GaussianTestFn(0.5)
    assert gaussian_fourier(phi0, [0, 0, 0]) == pytest.approx(1.0)
    vals = gaussian_fourier(GaussianTestFn(1.3), rng.normal(size=(50, 3)) * 3)
    assert np.all(vals.imag == 0) and np.all(vals.real > 0)
    with pytest.raises(DomainError):
        GaussianTestFn(0.0)


def test_gaussian_fourier_matches_transform():
    # direct 3-D transform of exp(-a|xi - b|^2) factorises over coordinates
    phi = GaussianTestFn(0.8, (0.5, -0.2, 0.1))
    x = np.array([0.7, 0.3, -1.2])
    val = (2 * math.pi) ** -1.5
    for i in range(3):
        re = integrate.quad(lambda s: math.cos(s * x[i]) * math.exp(-phi.a * (s - phi.b[i]) ** 2), -30, 30)[0]
        im = integrate.quad(lambda s: -math.sin(s * x[i]) * math.exp(-phi.a * (s - phi.b[i]) ** 2), -30, 30)[0]
        val = val * (re + 1j * im)
    assert gaussian_fourier(phi, x) == pytest.approx(val, rel=1e-10)


def test_parseval():
    phi = GaussianTestFn(0.7, (0.3, 0.0, -0.4))
    lhs = (math.pi / (2 * phi.a)) ** 1.5  # int |phi|^2
    rad = integrate.quad(lambda r: 4 * math.pi * r * r * abs(gaussian_fourier(phi, [r, 0, 0])) ** 2, 0, np.inf)[0]
    assert rad == pytest.approx(lhs, rel=1e-8)


@pytest.mark.parametrize("label,kind,j,k,kw", [
    ("N", "newton", 0, 0, {}), ("O", "oseen", 0, 0, {}), ("O_lambda", "resolvent", 0, 0, dict(lam=1.0)),
    ("K", "heat", 0, 0, dict(t=1.0)), ("T11", "stokes", 0, 0, dict(t=1.0)), ("T22", "stokes", 1, 1, dict(t=1.0)),
    ("Gamma11", "gamma_col1", 0, 0, dict(t=1.0)), ("E11", "oseen_tensor", 0, 0, {}),
])
@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("b", [(0.0, 0.0, 0.0), (1.0, 0.0, 0.0)])
def test_closed_form_pairings(p, label, kind, j, k, kw, a, b):
    g = kernel_function(kind, j, k, p, **kw)
    rep = pairing_check(g, kind, GaussianTestFn(a, b), j, k, p, quad=PairingQuadrature(check=False), **kw)
    assert rep.rel_err <= 1e-4
    assert rep.abs_err == pytest.approx(abs(rep.lhs - rep.rhs))


@pytest.mark.parametrize("kind,j,kw", [("newton", 0, {}), ("heat", 0, dict(t=0.5)), ("stokes", 0, dict(t=0.5)),
                                       ("stokes", 2, dict(t=0.5))])
def test_real_pairings_for_even_kernels(p, kind, j, kw):
    g = kernel_function(kind, j, j, p, **kw)
    rep = pairing_check(g, kind, GaussianTestFn(1.0), j, j, p, quad=PairingQuadrature(check=False), **kw)
    assert abs(rep.lhs.imag) <= 1e-6 * abs(rep.lhs)


def test_axial_column_path_matches_direct_evaluation(p):
    # E_.1 is equivariant under rotations about e1, like Z_.1(., 0)
    col = AxialColumn(lambda pts: oseen_velocity_tensors(pts, p)[0][:, :, 0])
    phi = GaussianTestFn(1.0, (0.3, 0.4, -0.2))
    q = PairingQuadrature(check=False)
    for j in range(3):
        direct = pairing_check(kernel_function("oseen_tensor", j, 0, p), "oseen_tensor", phi, j, 0, p, quad=q)
        rotated = pairing_check(col, "oseen_tensor", phi, j, 0, p, quad=q)
        assert rotated.lhs == pytest.approx(direct.lhs, rel=1e-12)
    assert len(col.cache) == 1


def test_pairing_reports_unresolved_quadrature(p):
    g = kernel_function("oseen", p=p)
    crude = PairingQuadrature(radial_nodes=6, panel_width=4.0, n_theta=12, n_phi=12, tol=1e-12)
    with pytest.raises(NonConvergenceError):
        pairing_check(g, "oseen", GaussianTestFn(1.0, (0.5, 0.5, 0.5)), p=p, quad=crude)


def test_pairing_rule_validation():
    with pytest.raises(DomainError):
        PairingQuadrature(radial_nodes=4)
    c = PairingQuadrature().coarse()
    assert (c.radial_nodes, c.n_theta, c.n_phi, c.check) == (8, 26, 42, False)


def test_pairing_error_estimates_present(p):
    g = kernel_function("newton")
    rep = pairing_check(g, "newton", GaussianTestFn(1.0, (0.2, 0.1, 0.0)), p=p)
    assert rep.lhs_error_estimate < 1e-6 * abs(rep.lhs)
    assert rep.rhs_error_estimate < 1e-6 * abs(rep.rhs)
