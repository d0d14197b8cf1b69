"""Far-field expansion of exterior flows: coefficients, remainders,
manufactured flows and decay-rate fits.

The body is replaced by the ball ``B_S0``; volume integrals run over the
exterior ``|y| > S0`` and surface integrals over ``|y| = S0`` with normal
``y / S0``.  For a flow forced inside the ball the volume terms vanish and
every coefficient comes from the sphere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .core import PhysParams, as_point, norm, omega_cross, wake_weight
from .errors import DomainError, IncompleteSampleError, SupportError
from .oseen_tensor import oseen_pressure, oseen_velocity_tensors
from .stokes_rotating import SourceIntegrand, TimeQuadratureConfig, integrate_sources

DEFAULT_RAYS = (
    (1.0, 0.0, 0.0),
    (-1.0, 0.0, 0.0),
    (0.0, 1.0, 0.0),
    (1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0), 0.0),
    (-1.0 / math.sqrt(2.0), 0.0, 1.0 / math.sqrt(2.0)),
)
DEFAULT_RADII = (5.0, 10.0, 20.0, 40.0)


# ------------------------------------------------------------------ sphere

@dataclass(frozen=True)
class SphereQuadrature:
    radius: float
    points: np.ndarray
    normals: np.ndarray
    weights: np.ndarray
    n_theta: int
    n_phi: int

    def __len__(self):
        return len(self.weights)

    def integrate(self, values):
        return np.tensordot(self.weights, np.asarray(values), axes=(0, 0))


def sphere_quadrature(S0: float, n_theta: int = 16, n_phi: int = 32) -> SphereQuadrature:
    """Gauss-Legendre in ``cos(theta)`` (polar axis ``e1``) times the
    trapezoid rule in azimuth."""
    S0 = float(S0)
    if not S0 > 0:
        raise DomainError("sphere radius must be positive")
    if int(n_theta) < 4 or int(n_phi) < 8:
        raise DomainError("sphere rule needs n_theta >= 4 and n_phi >= 8")
    c, wc = leggauss(int(n_theta))
    ph = 2.0 * math.pi * np.arange(int(n_phi)) / int(n_phi)
    s = np.sqrt(1.0 - c * c)
    dirs = np.stack([np.repeat(c, len(ph)), np.outer(s, np.cos(ph)).ravel(),
                     np.outer(s, np.sin(ph)).ravel()], axis=-1)
    pts = S0 * dirs
    w = np.repeat(wc, len(ph)) * (2.0 * math.pi / len(ph)) * S0 * S0
    return SphereQuadrature(S0, pts, pts / S0, w, int(n_theta), int(n_phi))


# -------------------------------------------------------------- flow data

@dataclass(frozen=True)
class FlowSample:
    """Discrete flow data on the sphere and on volume nodes.

    ``grad_u[..., k, l] = d_l u_k``.  Volume nodes carry the forcing ``f``;
    for nonlinear flows they must also carry ``volume_u`` and
    ``volume_grad_u`` wherever they lie outside the sphere.
    """

    sphere: SphereQuadrature
    u: np.ndarray
    grad_u: np.ndarray
    pressure: np.ndarray
    volume_points: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    volume_weights: np.ndarray = field(default_factory=lambda: np.zeros(0))
    f: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    linearized: bool = True
    volume_u: np.ndarray | None = None
    volume_grad_u: np.ndarray | None = None

    def __post_init__(self):
        n = len(self.sphere)
        checks = [("u", self.u, (n, 3)), ("grad_u", self.grad_u, (n, 3, 3)),
                  ("pressure", self.pressure, (n,))]
        nv = len(np.asarray(self.volume_weights))
        checks += [("volume_points", self.volume_points, (nv, 3)), ("f", self.f, (nv, 3))]
        for name, arr, shape in checks:
            if arr is None:
                raise IncompleteSampleError(f"flow sample lacks {name}")
            arr = np.asarray(arr, dtype=float)
            if arr.shape != shape:
                raise IncompleteSampleError(f"{name} has shape {arr.shape}, expected {shape}")
            if not np.all(np.isfinite(arr)):
                raise IncompleteSampleError(f"{name} has non-finite entries")

    @property
    def exterior(self) -> np.ndarray:
        """Mask of volume nodes outside the sphere."""
        return norm(np.asarray(self.volume_points)) > self.sphere.radius

    def convective_term(self) -> np.ndarray:
        """``(u . grad) u`` at exterior volume nodes (zeros when linearized)."""
        ext = self.exterior
        if self.linearized or not np.any(ext):
            return np.zeros((int(ext.sum()), 3))
        if self.volume_u is None or self.volume_grad_u is None:
            raise IncompleteSampleError("nonlinear flow needs u and grad u at exterior volume nodes")
        vu = np.asarray(self.volume_u)[ext]
        vg = np.asarray(self.volume_grad_u)[ext]
        return np.einsum("nkl,nl->nk", vg, vu)


@dataclass(frozen=True)
class ExpansionCoefficients:
    beta: np.ndarray
    flux: float


def _surface_stress(flow: FlowSample, p: PhysParams, nonlinear: bool):
    """``sum_l (-d_l u_k + delta_kl pi + (tau e1 - omega x y)_l u_k
    [- tau u_l u_k]) n_l`` at the sphere nodes."""
    sq = flow.sphere
    n = sq.normals
    u = np.asarray(flow.u, dtype=float)
    drift = p.tau * np.array([1.0, 0.0, 0.0]) - omega_cross(sq.points, p)
    sig = (-np.einsum("skl,sl->sk", flow.grad_u, n) + flow.pressure[:, None] * n
           + np.sum(drift * n, axis=1)[:, None] * u)
    if nonlinear:
        sig = sig - p.tau * np.sum(u * n, axis=1)[:, None] * u
    return sig


def beta_coefficients(flow: FlowSample, p: PhysParams) -> ExpansionCoefficients:
    """``beta_k`` = exterior volume integral of ``f_k`` plus the sphere
    integral of the stress-like combination; ``flux = int u.n``."""
    sq = flow.sphere
    ext = flow.exterior
    vol = np.asarray(flow.volume_weights)[ext] @ np.asarray(flow.f)[ext] if np.any(ext) else np.zeros(3)
    sig = _surface_stress(flow, p, nonlinear=not flow.linearized)
    beta = vol + sq.integrate(sig)
    flux = float(sq.integrate(np.sum(flow.u * sq.normals, axis=1)))
    return ExpansionCoefficients(beta=np.asarray(beta, dtype=float), flux=flux)


def _check_outside(x, flow: FlowSample):
    x = as_point(x)
    if not float(norm(x)) > flow.sphere.radius:
        raise SupportError(f"evaluation point |x| = {float(norm(x)):.6g} is not outside the sphere "
                           f"of radius {flow.sphere.radius:.6g}")
    return x


def _remainder(x, flow: FlowSample, p: PhysParams, cfg, extra_origin=None):
    x = _check_outside(x, flow)
    sq = flow.sphere
    nonlinear = not flow.linearized
    sig = _surface_stress(flow, p, nonlinear=False)
    ws = sq.weights
    u = np.asarray(flow.u, dtype=float)
    un = np.sum(u * sq.normals, axis=1)

    ext = flow.exterior
    vy = np.asarray(flow.volume_points)[ext]
    vw = np.asarray(flow.volume_weights)[ext]
    vf = np.asarray(flow.f)[ext]
    vconv = flow.convective_term()

    origin = -(ws @ sig) - (vw @ vf if len(vw) else 0.0)
    if nonlinear:
        origin = origin + p.tau * (ws * un) @ u
    if extra_origin is not None:
        origin = origin + extra_origin
    ys = np.vstack([sq.points, vy, np.zeros((1, 3))])
    Wv = np.vstack([ws[:, None] * sig,
                    vw[:, None] * (vf - p.tau * vconv) if len(vw) else np.zeros((0, 3)),
                    origin[None, :]])[:, :, None]
    Wy = np.zeros((len(ys), 3, 3, 1))
    Wy[: len(sq), :, :, 0] = ws[:, None, None] * u[:, :, None] * sq.normals[:, None, :]
    src = SourceIntegrand(x, ys, p, Wv=Wv, Wy=Wy)
    val, err = integrate_sources(src, p, cfg)
    parts = src.split(val)
    total = parts["value"][:, 0] + parts["y_gradient"][:, 0]
    # pressure part of the fundamental solution
    dE4 = oseen_pressure(x - sq.points) - oseen_pressure(x)
    total = total + (ws * un) @ dE4
    return total


def remainder_F(x, flow: FlowSample, p: PhysParams,
                cfg: TimeQuadratureConfig | None = None) -> np.ndarray:
    """Remainder ``F(x)`` of the expansion in terms of ``Z(x, 0)``, for
    ``|x| > S0``.  All ``Z`` terms share one time integral."""
    return _remainder(x, flow, p, cfg)


def remainder_G(x, flow: FlowSample, p: PhysParams,
                cfg: TimeQuadratureConfig | None = None,
                coefficients: ExpansionCoefficients | None = None) -> np.ndarray:
    """``G_j(x) = beta_2 Z_j2(x, 0) + beta_3 Z_j3(x, 0) + F_j(x)``."""
    co = coefficients or beta_coefficients(flow, p)
    extra = np.array([0.0, co.beta[1], co.beta[2]])
    return _remainder(x, flow, p, cfg, extra_origin=extra)


def leading_term(x, co: ExpansionCoefficients, p: PhysParams):
    """``beta_1 E_.1(x)`` and the flux term ``flux x / (4 pi |x|^3)``."""
    x = as_point(x)
    E, _ = oseen_velocity_tensors(x, p)
    return co.beta[0] * E[..., :, 0], co.flux * oseen_pressure(x)


# ------------------------------------------------------ manufactured flows

def _bump(z2):
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(z2 < 1.0, np.exp(-1.0 / (1.0 - np.minimum(z2, 1.0 - 1e-300))), 0.0)


@dataclass(frozen=True)
class PointForce:
    """Smeared point force ``f = c eta_eps(. - y0)`` on volume nodes."""

    y0: np.ndarray
    c: np.ndarray
    eps: float
    points: np.ndarray
    weights: np.ndarray
    f: np.ndarray


def mollified_force(y0, c, eps: float, n_vol: int = 12) -> PointForce:
    """Product Gauss-Legendre nodes on the box around the ``eps``-ball; the
    bump is normalised so that the discrete integral of ``f`` equals ``c``."""
    y0, c = as_point(y0, "y0"), as_point(c, "c")
    eps = float(eps)
    if not eps > 0:
        raise DomainError("mollifier radius must be positive")
    g, w = leggauss(int(n_vol))
    ax = y0[None, :] + eps * g[:, None]
    P = np.stack(np.meshgrid(ax[:, 0], ax[:, 1], ax[:, 2], indexing="ij"), axis=-1).reshape(-1, 3)
    W = (np.einsum("i,j,k->ijk", w, w, w) * eps ** 3).ravel()
    eta = _bump(np.sum((P - y0) ** 2, axis=1) / eps ** 2)
    keep = eta > 0
    P, W, eta = P[keep], W[keep], eta[keep]
    eta = eta / (W @ eta)
    return PointForce(y0=y0, c=c, eps=eps, points=P, weights=W, f=eta[:, None] * c[None, :])


def forced_velocity(x, force: PointForce, p: PhysParams,
                    cfg: TimeQuadratureConfig | None = None, want_gradient: bool = False):
    """``u(x) = int Z(x, y) f(y) dy`` and optionally ``grad u`` ([k, l] = d_l u_k)."""
    x = as_point(x)
    Wv = (force.weights[:, None] * force.f)[:, :, None]
    src = SourceIntegrand(x, force.points, p, Wv=Wv, want_xgrad=want_gradient)
    val, _ = integrate_sources(src, p, cfg)
    parts = src.split(val)
    u = parts["value"][:, 0]
    if want_gradient:
        return u, parts["x_gradient"][:, :, 0]
    return u


def forced_pressure(x, force: PointForce) -> np.ndarray:
    """``pi(x) = sum_k int E_4k(x - y) f_k(y) dy``."""
    x = as_point(x)
    E4 = oseen_pressure(x[..., None, :] - force.points)
    return np.einsum("...nk,n,nk->...", E4, force.weights, force.f)


def manufactured_flow(y0, c, eps: float, S0: float, p: PhysParams,
                      cfg: TimeQuadratureConfig | None = None, n_vol: int = 12,
                      n_theta: int = 16, n_phi: int = 32,
                      return_force: bool = False):
    """Linearized flow driven by a smeared point force inside ``B_S0``.

    ``u`` and ``grad u`` on the sphere come from the kernel ``Z`` integrated
    against ``f``; the pressure from ``E_4``.
    """
    y0 = as_point(y0, "y0")
    S0 = float(S0)
    if not float(norm(y0)) + float(eps) < S0:
        raise SupportError("force support must lie strictly inside the sphere")
    force = mollified_force(y0, c, eps, n_vol)
    sq = sphere_quadrature(S0, n_theta, n_phi)
    u = np.empty((len(sq), 3))
    gu = np.empty((len(sq), 3, 3))
    for i, xs in enumerate(sq.points):
        u[i], gu[i] = forced_velocity(xs, force, p, cfg, want_gradient=True)
    flow = FlowSample(sphere=sq, u=u, grad_u=gu, pressure=forced_pressure(sq.points, force),
                      volume_points=force.points, volume_weights=force.weights, f=force.f,
                      linearized=True)
    return (flow, force) if return_force else flow


# ------------------------------------------------------------ decay fits

@dataclass(frozen=True)
class DecayFit:
    slope: float
    intercept: float
    max_residual: float
    abscissa: str


def decay_fit(samples, abscissa: str = "wake") -> DecayFit:
    """Least-squares line of ``log(value)`` against ``log(|x| s(x))``
    (``abscissa="wake"``) or ``log|x|`` (``"radial"``)."""
    if abscissa not in ("wake", "radial"):
        raise DomainError("abscissa must be 'wake' or 'radial'")
    pts = np.array([as_point(x) for x, _ in samples], dtype=float)
    vals = np.array([float(v) for _, v in samples])
    if len(vals) < 4:
        raise DomainError("a decay fit needs at least 4 samples")
    if np.any(~(vals > 0)):
        raise DomainError("decay fit values must be positive")
    r = norm(pts)
    X = np.log(r * wake_weight(pts)) if abscissa == "wake" else np.log(r)
    Y = np.log(vals)
    slope, intercept = np.polyfit(X, Y, 1)
    res = np.abs(Y - (slope * X + intercept))
    return DecayFit(float(slope), float(intercept), float(res.max()), abscissa)


def ray_points(rays=DEFAULT_RAYS, radii=DEFAULT_RADII):
    """``{ray: [r * unit(ray) for r in radii]}``."""
    out = {}
    for d in rays:
        u = np.asarray(d, dtype=float)
        u = u / np.linalg.norm(u)
        out[tuple(d)] = [r * u for r in radii]
    return out


def ray_fits(fn, rays=DEFAULT_RAYS, radii=DEFAULT_RADII, abscissa: str = "wake"):
    """Per-ray decay fits of the positive scalar ``fn(x)``."""
    return {d: decay_fit([(x, fn(x)) for x in pts], abscissa)
            for d, pts in ray_points(rays, radii).items()}


__all__ = [
    "SphereQuadrature", "sphere_quadrature", "FlowSample", "ExpansionCoefficients",
    "beta_coefficients", "remainder_F", "remainder_G", "leading_term", "PointForce",
    "mollified_force", "forced_velocity", "forced_pressure", "manufactured_flow",
    "DecayFit", "decay_fit", "ray_points", "ray_fits", "DEFAULT_RAYS", "DEFAULT_RADII",
]
