"""Fourier symbols of the kernels and distributional pairing checks.

Convention: ``g^(xi) = (2 pi)^(-3/2) int exp(-i xi.x) g(x) dx``.  A kernel
``G`` with symbol ``S`` satisfies ``int G phi^ dx = int S phi dxi`` for every
Gaussian test function ``phi``; both sides are computed by quadrature in
spherical coordinates whose polar axis is ``e1`` (the stream direction).

Indices ``j, k`` are zero-based throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

from .core import PhysParams, as_point, norm, rotation_from_angle
from .errors import DomainError, NonConvergenceError, SingularPointError
from .oseen_tensor import oseen_velocity_tensors
from .scalar_kernels import heat_kernel, newton, oseen_resolvent_scalar, oseen_scalar
from .stokes_rotating import TimeQuadratureConfig, gamma, stokes_T_tensors, z_tensor

C3 = (2.0 * math.pi) ** -1.5
KINDS = ("newton", "oseen", "resolvent", "heat", "stokes", "gamma_col1", "z_col1", "oseen_tensor")
_NEEDS_T = {"heat", "stokes", "gamma_col1"}
_SINGULAR_AT_ZERO = {"newton", "stokes", "gamma_col1", "z_col1", "oseen_tensor", "oseen"}


def _check_kind(kind, t, lam):
    if kind not in KINDS:
        raise DomainError(f"unknown symbol kind {kind!r}; expected one of {KINDS}")
    if kind in _NEEDS_T and not (t is not None and t > 0):
        raise DomainError(f"symbol {kind!r} needs a positive time t")
    if kind == "resolvent" and not (lam is not None and lam > 0):
        raise DomainError("resolvent symbol needs lam > 0")


def symbol(kind: str, xi, j: int = 0, k: int = 0, p: PhysParams | None = None,
           t: float | None = None, lam: float | None = None):
    """Closed-form Fourier symbol of the kernel ``kind`` at ``xi``."""
    _check_kind(kind, t, lam)
    p = p or PhysParams()
    xi = as_point(xi, "xi")
    q2 = np.sum(xi * xi, axis=-1)
    if kind in _SINGULAR_AT_ZERO and np.any(q2 == 0.0):
        raise SingularPointError(f"symbol {kind!r} is singular at xi = 0")
    oseen_den = 1j * p.tau * xi[..., 0] + q2
    with np.errstate(invalid="ignore", divide="ignore"):
        if kind == "newton":
            out = C3 / q2
        elif kind == "oseen":
            out = C3 / oseen_den
        elif kind == "resolvent":
            out = C3 / (lam + oseen_den)
        elif kind == "heat":
            out = C3 * np.exp(-t * q2)
        else:
            kk = 0 if kind in ("gamma_col1", "z_col1") else k
            proj = float(j == kk) - xi[..., j] * xi[..., kk] / q2
            if kind == "stokes":
                out = C3 * proj * np.exp(-t * q2)
            elif kind == "gamma_col1":
                out = C3 * proj * np.exp(-t * oseen_den)
            else:  # z_col1, oseen_tensor
                out = C3 * proj / oseen_den
    out = np.asarray(out, dtype=complex)
    return complex(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class GaussianTestFn:
    """``phi(xi) = exp(-a |xi - b|^2)``."""

    a: float
    b: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if not (float(self.a) > 0):
            raise DomainError("test-function width a must be positive")
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", tuple(float(v) for v in as_point(self.b, "b")))

    def __call__(self, xi):
        d = as_point(xi, "xi") - np.array(self.b)
        return np.exp(-self.a * np.sum(d * d, axis=-1))


def gaussian_fourier(phi: GaussianTestFn, x):
    """``phi^(x) = (2a)^(-3/2) exp(-|x|^2/(4a)) exp(-i b.x)``."""
    x = as_point(x)
    b = np.array(phi.b)
    out = (2.0 * phi.a) ** -1.5 * np.exp(-np.sum(x * x, axis=-1) / (4.0 * phi.a) - 1j * (x @ b))
    return complex(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class PairingReport:
    lhs: complex
    rhs: complex
    abs_err: float
    rel_err: float
    lhs_error_estimate: float = 0.0
    rhs_error_estimate: float = 0.0


@dataclass(frozen=True)
class PairingQuadrature:
    """Node counts of both spherical rules.

    ``radial_nodes`` Gauss-Legendre nodes per radial panel of width
    ``panel_width`` (geometrically graded panels are added towards 0),
    ``n_theta`` nodes in the polar cosine, ``n_phi`` trapezoid nodes in
    azimuth.  ``tail_exponent`` fixes the truncation radius through
    ``exp(-tail_exponent)`` of the Gaussian factor.  With ``check`` set, the
    pairing is recomputed with roughly two thirds of the nodes and the
    difference is reported (and compared to ``tol``).
    """

    radial_nodes: int = 12
    panel_width: float = 1.0
    n_theta: int = 40
    n_phi: int = 64
    tail_exponent: float = 40.0
    check: bool = True
    tol: float | None = None

    def __post_init__(self):
        # the coarse companion rule must differ from this one
        if self.radial_nodes < 6 or self.n_theta < 12 or self.n_phi < 12:
            raise DomainError("pairing rule needs radial_nodes >= 6, n_theta >= 12, n_phi >= 12")
        if not (self.panel_width > 0 and self.tail_exponent > 0):
            raise DomainError("panel_width and tail_exponent must be positive")

    def coarse(self) -> "PairingQuadrature":
        rule = object.__new__(PairingQuadrature)
        for name, val in (("radial_nodes", (2 * self.radial_nodes) // 3), ("panel_width", self.panel_width),
                          ("n_theta", (2 * self.n_theta) // 3), ("n_phi", (2 * self.n_phi) // 3),
                          ("tail_exponent", self.tail_exponent), ("check", False), ("tol", None)):
            object.__setattr__(rule, name, val)
        return rule


class AxialColumn:
    """Vector-valued kernel ``x -> G(x)`` equivariant under rotations about
    ``e1`` (``G(R x) = R G(x)``), evaluated only on the half plane
    ``x3 = 0, x2 >= 0`` and rotated elsewhere.  Values are cached per node."""

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray]):
        self.fn = fn
        self.cache: dict[bytes, np.ndarray] = {}

    def halfplane(self, pts):
        key = np.ascontiguousarray(pts).tobytes()
        if key not in self.cache:
            self.cache[key] = np.asarray(self.fn(pts))
        return self.cache[key]


def _radial_edges(r_max, width, graded_levels=6):
    inner = min(width, r_max)
    edges = [0.0] + [inner * 2.0 ** -k for k in range(graded_levels, 0, -1)] + [inner]
    n = max(1, int(math.ceil((r_max - inner) / width)))
    edges += list(np.linspace(inner, r_max, n + 1)[1:])
    return np.unique(edges)


def _composite_gl(edges, n):
    x, w = leggauss(n)
    a, b = np.asarray(edges[:-1]), np.asarray(edges[1:])
    hl, c = 0.5 * (b - a), 0.5 * (a + b)
    return (c[:, None] + hl[:, None] * x).ravel(), (hl[:, None] * w).ravel()


def _directions(c, phi):
    s = np.sqrt(np.clip(1.0 - c * c, 0.0, None))
    return np.stack([np.broadcast_to(c[:, None], (len(c), len(phi))),
                     s[:, None] * np.cos(phi)[None, :],
                     s[:, None] * np.sin(phi)[None, :]], axis=-1)


def _lhs(kernel, j, phi: GaussianTestFn, q: PairingQuadrature):
    r_max = math.sqrt(4.0 * phi.a * q.tail_exponent)
    r, wr = _composite_gl(_radial_edges(r_max, q.panel_width), q.radial_nodes)
    c, wc = leggauss(q.n_theta)
    ph = 2.0 * math.pi * np.arange(q.n_phi) / q.n_phi
    wph = 2.0 * math.pi / q.n_phi
    dirs = _directions(c, ph)  # (nc, nphi, 3)
    x = r[:, None, None, None] * dirs[None]
    if isinstance(kernel, AxialColumn):
        s = np.sqrt(1.0 - c * c)
        half = np.stack([np.outer(r, c), np.outer(r, s), np.zeros((len(r), len(c)))], axis=-1)
        col = kernel.halfplane(half.reshape(-1, 3)).reshape(len(r), len(c), 3)
        Rph = rotation_from_angle(ph)  # (nphi, 3, 3)
        G = np.einsum("fa,rca->rcf", Rph[:, j, :], col)
    else:
        G = np.asarray(kernel(x.reshape(-1, 3))).reshape(len(r), len(c), len(ph))
    f = G * gaussian_fourier(phi, x)
    return complex(np.einsum("r,c,rcf->", wr * r * r, wc, f) * wph)


def _c_edges(scale):
    # panels in the polar cosine graded towards c = 0 at the given scale
    if scale >= 0.5:
        return np.linspace(-1.0, 1.0, 5)
    pts = [scale * 2.0 ** k for k in range(int(math.ceil(math.log2(1.0 / scale))))]
    pts = [v for v in pts if v < 1.0]
    pos = np.array([0.0] + pts + [1.0])
    return np.unique(np.concatenate([-pos, pos]))


def _rhs(kind, j, k, p, t, lam, phi: GaussianTestFn, q: PairingQuadrature):
    b = np.array(phi.b)
    rho_max = float(norm(b)) + math.sqrt(q.tail_exponent / phi.a)
    rr, wr = _composite_gl(_radial_edges(rho_max, q.panel_width), q.radial_nodes)
    ph = 2.0 * math.pi * np.arange(q.n_phi) / q.n_phi
    wph = 2.0 * math.pi / q.n_phi
    oseen_like = kind in ("oseen", "z_col1", "oseen_tensor", "resolvent")
    nc = max(6, q.n_theta // 4)
    total = 0.0 + 0.0j
    for rho, w in zip(rr, wr):
        if oseen_like:
            cc, wc = _composite_gl(_c_edges(rho / p.tau), nc)
        else:
            cc, wc = leggauss(q.n_theta)
        xi = rho * _directions(cc, ph)
        val = symbol(kind, xi, j, k, p, t, lam) * phi(xi)
        total += w * rho * rho * wph * np.einsum("c,cf->", wc, val)
    return complex(total)


def kernel_function(kind: str, j: int = 0, k: int = 0, p: PhysParams | None = None,
                    t: float | None = None, lam: float | None = None,
                    cfg: TimeQuadratureConfig | None = None):
    """Pointwise kernel matching ``symbol(kind, ., j, k, ...)``.

    ``z_col1`` returns an :class:`AxialColumn` (column 1 of ``Z(., 0)``);
    all other kinds return a vectorised callable of points ``(n, 3)``.
    """
    _check_kind(kind, t, lam)
    p = p or PhysParams()
    if kind == "newton":
        return lambda x: newton(x)
    if kind == "oseen":
        return lambda x: oseen_scalar(x, p)
    if kind == "resolvent":
        return lambda x: oseen_resolvent_scalar(x, lam, p)
    if kind == "heat":
        return lambda x: heat_kernel(x, t)
    if kind == "stokes":
        return lambda x: stokes_T_tensors(x, t)[0][..., j, k]
    if kind == "gamma_col1":
        return lambda x: gamma(x, np.zeros(3), t, p)[..., j, 0]
    if kind == "oseen_tensor":
        return lambda x: oseen_velocity_tensors(x, p)[0][..., j, k]

    def zcol(pts):
        return np.array([z_tensor(pt, np.zeros(3), p, cfg).value[:, 0] for pt in pts])

    return AxialColumn(zcol)


def pairing_check(kernel, kind: str, phi: GaussianTestFn, j: int = 0, k: int = 0,
                  p: PhysParams | None = None, t: float | None = None, lam: float | None = None,
                  quad: PairingQuadrature | None = None) -> PairingReport:
    """Compare ``int G phi^ dx`` (``G`` = ``kernel``) with ``int S phi dxi``.

    ``kernel`` is a vectorised callable or an :class:`AxialColumn`, whose
    component ``j`` is paired.
    """
    _check_kind(kind, t, lam)
    p = p or PhysParams()
    q = quad or PairingQuadrature()
    lhs = _lhs(kernel, j, phi, q)
    rhs = _rhs(kind, j, k, p, t, lam, phi, q)
    lhs_e = rhs_e = 0.0
    if q.check:
        qc = q.coarse()
        lhs_e = abs(lhs - _lhs(kernel, j, phi, qc))
        rhs_e = abs(rhs - _rhs(kind, j, k, p, t, lam, phi, qc))
    abs_err = abs(lhs - rhs)
    rel_err = abs_err / abs(rhs) if rhs != 0 else (0.0 if abs_err == 0 else math.inf)
    if q.tol is not None and max(lhs_e, rhs_e) > q.tol * max(abs(rhs), 1e-300):
        raise NonConvergenceError(
            f"pairing quadrature unresolved (estimates {lhs_e:.2e}, {rhs_e:.2e})",
            value=(lhs, rhs), estimated_error=max(lhs_e, rhs_e))
    return PairingReport(lhs=lhs, rhs=rhs, abs_err=abs_err, rel_err=rel_err,
                         lhs_error_estimate=lhs_e, rhs_error_estimate=rhs_e)


__all__ = ["KINDS", "symbol", "GaussianTestFn", "gaussian_fourier", "PairingReport",
           "PairingQuadrature", "AxialColumn", "kernel_function", "pairing_check"]
