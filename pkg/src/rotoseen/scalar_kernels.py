"""Scalar fundamental solutions and the Oseen potential.

All evaluators broadcast over leading axes of ``x``.  Spatial derivatives
are selected with a multi-index ``alpha``; the radially symmetric kernels
share one representation of their derivative tensors::

    d_j f        = A z_j
    d_j d_k f    = A delta_jk + C z_j z_k
    d_l d_j d_k f = C (delta_jk z_l + delta_jl z_k + delta_kl z_j) + D z_j z_k z_l

with ``A = f'/r``, ``C = (f'' - f'/r)/r**2`` and ``D = C'/r``.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.polynomial.hermite_e import hermeval
from scipy.special import erf

from .core import MultiIndex, PhysParams, as_point, norm, require_nonzero
from .errors import DomainError, SingularPointError

FOUR_PI = 4.0 * math.pi
EULER_GAMMA = 0.57721566490153286061
_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)
# below this value of |x|/(2 sqrt(t)) the heat-Newton coefficients use their
# Taylor series; the closed forms lose digits through cancellation
_Q_SERIES = 1.0
_N_SERIES = 28
_I3 = np.eye(3)


def _scalar(v):
    return float(v) if np.ndim(v) == 0 else v


def radial_tensor(z, order, A=None, C=None, D=None):
    """Derivative tensor of order 1..3 of a radial function (see module doc)."""
    if order == 1:
        return A[..., None] * z
    if order == 2:
        zz = z[..., :, None] * z[..., None, :]
        return A[..., None, None] * _I3 + C[..., None, None] * zz
    if order == 3:
        dz = _I3[:, :, None] * z[..., None, None, :]  # delta_jk z_l at [j,k,l]
        sym = dz + np.swapaxes(dz, -1, -2) + np.moveaxis(dz, -1, -3)
        zzz = z[..., :, None, None] * z[..., None, :, None] * z[..., None, None, :]
        return C[..., None, None, None] * sym + D[..., None, None, None] * zzz
    raise ValueError(f"unsupported derivative order {order}")


def _component(tensor, alpha: MultiIndex):
    axes = alpha.axes()
    return tensor[(Ellipsis, *axes)]


# -------------------------------------------------------------------- Newton

def newton_coefficients(r):
    """(value, A, C, D) of ``N = 1/(4 pi r)``; also valid for complex ``r``."""
    inv = 1.0 / r
    inv2 = inv * inv
    val = inv / FOUR_PI
    A = -val * inv2
    C = 3.0 * val * inv2 * inv2
    D = -15.0 * val * inv2 * inv2 * inv2
    return val, A, C, D


def newton(x, alpha=None):
    """Newton potential ``(4 pi |x|)^-1`` or one of its derivatives up to order 3."""
    x = as_point(x)
    alpha = MultiIndex.of(alpha)
    r = require_nonzero(x, "Newton potential")
    val, A, C, D = newton_coefficients(r)
    if alpha.order == 0:
        return _scalar(val)
    return _scalar(_component(radial_tensor(x, alpha.order, A, C, D), alpha))


# -------------------------------------------------------------- Oseen scalars

def r_minus_x1(x):
    """``|x| - x1`` without cancellation near the positive x1-axis."""
    x = np.asarray(x, dtype=float)
    r = norm(x)
    x1 = x[..., 0]
    perp2 = x[..., 1] ** 2 + x[..., 2] ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        stable = perp2 / (r + x1)
    return np.where(x1 > 0.0, stable, r - x1)


def oseen_scalar(x, p: PhysParams):
    """Scalar Oseen fundamental solution ``exp(-tau(|x|-x1)/2)/(4 pi |x|)``."""
    x = as_point(x)
    r = require_nonzero(x, "scalar Oseen kernel")
    # same factor order as newton(), so the two agree bit for bit on the wake axis
    return _scalar((1.0 / r) / FOUR_PI * np.exp(-0.5 * p.tau * r_minus_x1(x)))


def oseen_resolvent_scalar(x, lam, p: PhysParams):
    """Fundamental solution of ``-Lap v + tau d1 v + lam v``, ``lam > 0``."""
    lam = float(lam)
    if not lam > 0.0:
        raise DomainError(f"resolvent parameter must be positive, got {lam}")
    x = as_point(x)
    r = require_nonzero(x, "Oseen resolvent kernel")
    kappa = math.sqrt(lam + 0.25 * p.tau ** 2)
    # -kappa r + tau x1/2 = -(kappa - tau/2) r - tau (r - x1)/2
    expo = -(kappa - 0.5 * p.tau) * r - 0.5 * p.tau * r_minus_x1(x)
    return _scalar((1.0 / r) / FOUR_PI * np.exp(expo))


# ---------------------------------------------------------------- heat kernel

def _check_time(t):
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0.0)):
        raise DomainError("time argument must be positive")
    return t


def heat_kernel(x, t, alpha=None, l: int = 0):
    """``d_t^l d_x^alpha K(x, t)`` with ``K = (4 pi t)^-3/2 exp(-|x|^2/(4t))``.

    ``K`` factors over coordinates; each 1-D factor's derivatives are
    Hermite polynomials, and ``d_t = Lap`` turns the time derivative into a
    sum of second spatial derivatives.
    """
    x = as_point(x)
    t = _check_time(t)
    alpha = MultiIndex.of(alpha)
    if l not in (0, 1):
        raise DomainError("only l in {0, 1} is supported")
    K = (4.0 * math.pi * t) ** -1.5 * np.exp(-np.sum(x * x, axis=-1) / (4.0 * t))
    s = np.sqrt(2.0 * t)

    def factor(i, n):
        if n == 0:
            return 1.0
        coeffs = np.zeros(n + 1)
        coeffs[n] = 1.0
        return (-1.0 / s) ** n * hermeval(x[..., i] / s, coeffs)

    orders = list(alpha)
    if l == 0:
        poly = factor(0, orders[0]) * factor(1, orders[1]) * factor(2, orders[2])
    else:
        poly = 0.0
        for i in range(3):
            o = list(orders)
            o[i] += 2
            poly = poly + factor(0, o[0]) * factor(1, o[1]) * factor(2, o[2])
    return _scalar(K * poly)


# ------------------------------------------------------------ psi and E1

def exp1(x):
    """Exponential integral ``E1(x)`` for ``x > 0``: power series on
    ``(0, 1]`` and a modified-Lentz continued fraction above."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("E1 is evaluated for positive arguments only")
    out = np.empty_like(x)
    small = x <= 1.0
    if np.any(small):
        xs = x[small]
        out[small] = _ein_series(xs) - EULER_GAMMA - np.log(xs)
    big = ~small
    if np.any(big):
        xb = x[big]
        tiny = 1e-300
        b = xb + 1.0
        c = np.full_like(xb, 1.0 / tiny)
        d = 1.0 / b
        h = d.copy()
        for i in range(1, 500):
            an = -float(i * i)
            b = b + 2.0
            d = 1.0 / (an * d + b)
            c = b + an / c
            delta = c * d
            h *= delta
            if np.all(np.abs(delta - 1.0) < 1e-16):
                break
        out[big] = h * np.exp(-xb)
    return _scalar(out)


def _ein_series(r):
    """``sum_{k>=1} (-1)^(k+1) r^k / (k k!)``; converges for every real r."""
    r = np.asarray(r, dtype=float)
    total = np.zeros_like(r)
    term = np.ones_like(r)  # r^k / k! (signed) built incrementally
    k = 1
    while True:
        term = term * (-r) / k if k > 1 else -r * 1.0
        contrib = -term / k  # (-1)^(k+1) r^k/(k k!) == -((-r)^k/k!)/k
        total = total + contrib
        if k > 5 and np.all(np.abs(contrib) <= 1e-17 * np.maximum(np.abs(total), 1e-300)):
            break
        k += 1
        if k > 5000:
            break
    return total


def psi(r):
    """``psi(r) = int_0^r (1 - exp(-s))/s ds`` (entire in r)."""
    r = np.asarray(r, dtype=float)
    out = np.empty_like(r)
    small = r <= 1.0
    if np.any(small):
        out[small] = _ein_series(r[small])
    big = ~small
    if np.any(big):
        rb = r[big]
        out[big] = np.log(rb) + EULER_GAMMA + exp1(rb)
    return _scalar(out)


def psi_prime(r):
    """``psi'(r) = (1 - exp(-r))/r``, with ``psi'(0) = 1``."""
    r = np.asarray(r, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = -np.expm1(-r) / r
    tiny = np.abs(r) < 1e-8
    out = np.where(tiny, 1.0 - 0.5 * r, out)
    return _scalar(out)


def _psi_derivs(w):
    """psi', psi'', psi''' at ``w``; series for |w| < 2."""
    w = np.asarray(w, dtype=float)
    d1 = np.asarray(psi_prime(w), dtype=float)
    small = np.abs(w) < 2.0
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        em = np.exp(-w)
        d2 = (em * (1.0 + w) - 1.0) / (w * w)
        d3 = 2.0 * (-np.expm1(-w)) / w ** 3 - em * (1.0 / w + 2.0 / (w * w))
    if np.any(small):
        ws = w[small]
        s2 = np.zeros_like(ws)
        s3 = np.zeros_like(ws)
        for k in range(1, 45):
            fk = (-1.0) ** k / math.factorial(k + 1)
            s2 = s2 + fk * k * ws ** (k - 1)
            if k >= 2:
                s3 = s3 + fk * k * (k - 1) * ws ** (k - 2)
        d2 = np.where(small, 0.0, d2)
        d3 = np.where(small, 0.0, d3)
        d2[small] = s2
        d3[small] = s3
    return d1, d2, d3


# ---------------------------------------------------------------- Oseen Phi

def phi_tensors(x, p: PhysParams, order: int = 2):
    """Value and derivative tensors of ``Phi`` up to ``order`` (<= 3).

    Returns a list ``[Phi, grad, hess, third]`` truncated to ``order + 1``
    entries; tensors carry the derivative axes last.
    """
    x = as_point(x)
    tau = p.tau
    c = 1.0 / (FOUR_PI * tau)
    rmx = r_minus_x1(x)
    w = 0.5 * tau * rmx
    out = [c * np.asarray(psi(w), dtype=float)]
    if order == 0:
        return out
    r = require_nonzero(x, "derivatives of the Oseen potential")
    d1, d2, d3 = _psi_derivs(w)
    xh = x / r[..., None]
    v = xh.copy()
    v[..., 0] = -rmx / r  # x1/r - 1 without cancellation
    wj = 0.5 * tau * v
    out.append(c * d1[..., None] * wj)
    if order == 1:
        return out
    P = _I3 - xh[..., :, None] * xh[..., None, :]
    wjk = (0.5 * tau) * P / r[..., None, None]
    ww = wj[..., :, None] * wj[..., None, :]
    hess = c * (d2[..., None, None] * ww + d1[..., None, None] * wjk)
    out.append(hess)
    if order == 2:
        return out
    dx = _I3[:, :, None] * xh[..., None, None, :]  # delta_jk xh_l at [j,k,l]
    sym = dx + np.swapaxes(dx, -1, -2) + np.moveaxis(dx, -1, -3)
    xxx = xh[..., :, None, None] * xh[..., None, :, None] * xh[..., None, None, :]
    wjkl = (0.5 * tau) * (3.0 * xxx - sym) / (r * r)[..., None, None, None]
    www = wj[..., :, None, None] * wj[..., None, :, None] * wj[..., None, None, :]
    # w_jl w_k + w_kl w_j + w_jk w_l at [j,k,l]
    mixed = (wjk[..., :, None, :] * wj[..., None, :, None]
             + wjk[..., None, :, :] * wj[..., :, None, None]
             + wjk[..., :, :, None] * wj[..., None, None, :])
    third = c * (d3[..., None, None, None] * www + d2[..., None, None, None] * mixed
                 + d1[..., None, None, None] * wjkl)
    out.append(third)
    return out


def phi(x, p: PhysParams, alpha=None):
    """Oseen potential ``Phi = psi(tau (|x| - x1)/2)/(4 pi tau)`` or a
    derivative of order up to 3."""
    alpha = MultiIndex.of(alpha)
    if alpha.order > 3:
        raise DomainError("derivatives of Phi are available up to order 3")
    tens = phi_tensors(x, p, alpha.order)
    if alpha.order == 0:
        return _scalar(tens[0])
    return _scalar(_component(tens[alpha.order], alpha))


# ------------------------------------------------------- heat-Newton (N * K)

def _erf_coeffs(n_terms=_N_SERIES):
    n = np.arange(n_terms, dtype=float)
    fact = np.array([math.factorial(int(k)) for k in n], dtype=float)
    return _TWO_OVER_SQRT_PI * (-1.0) ** n / (fact * (2.0 * n + 1.0))


_CN = _erf_coeffs()
_NN = np.arange(_N_SERIES, dtype=float)
_S0 = _CN
_S1 = 2.0 * _NN * _CN
_S2 = 4.0 * _NN * (_NN - 1.0) * _CN
_S3 = 8.0 * _NN * (_NN - 1.0) * (_NN - 2.0) * _CN


def _poly_q2(coeffs, shift, q2):
    # sum_{n>=shift} coeffs[n] q2^(n-shift), Horner
    acc = np.zeros_like(q2)
    for cf in coeffs[:shift - 1:-1] if shift > 0 else coeffs[::-1]:
        acc = acc * q2 + cf
    return acc


def heat_newton_coefficients(r, t, want_value=True):
    """Radial coefficients ``(H, A, C, D)`` of ``H(., t) = N * K(., t)``.

    ``H(r) = erf(r/(2 sqrt t))/(4 pi r)``; with ``a = 1/(2 sqrt t)`` and
    ``q = a r`` every coefficient is ``a^(2m+1)/(4 pi)`` times an even
    function of ``q``, evaluated by series for ``q < 1``.
    """
    r = np.asarray(r, dtype=float)
    t = np.asarray(t, dtype=float)
    r, t = np.broadcast_arrays(r, t)
    shape = r.shape
    r, t = r.ravel(), t.ravel()
    a = 0.5 / np.sqrt(t)
    q = a * r
    q2 = q * q
    small = q < _Q_SERIES
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        iq = 1.0 / q
        iq2 = iq * iq
        G = _TWO_OVER_SQRT_PI * np.exp(-q2)
        ef = erf(q)
        e0 = ef * iq
        al = (G - ef * iq) * iq2
        ga = (-2.0 * G - 3.0 * G * iq2 + 3.0 * ef * iq2 * iq) * iq2
        de = (4.0 * G + 10.0 * G * iq2 + 15.0 * G * iq2 * iq2 - 15.0 * ef * iq2 * iq2 * iq) * iq2
    if np.any(small):
        qs = q2[small]
        e0[small] = _poly_q2(_S0, 0, qs)
        al[small] = _poly_q2(_S1, 1, qs)
        ga[small] = _poly_q2(_S2, 2, qs)
        de[small] = _poly_q2(_S3, 3, qs)
    a2 = a * a
    base = a / FOUR_PI
    H = (base * e0).reshape(shape) if want_value else None
    A = (base * a2 * al).reshape(shape)
    C = (base * a2 * a2 * ga).reshape(shape)
    D = (base * a2 * a2 * a2 * de).reshape(shape)
    return H, A, C, D


def heat_newton(x, t, alpha=None):
    """``d^alpha (N * K(., t))(x)`` for ``|alpha| <= 3``; smooth at ``x = 0``."""
    x = as_point(x)
    t = _check_time(t)
    alpha = MultiIndex.of(alpha)
    if alpha.order > 3:
        raise DomainError("heat-Newton derivatives are available up to order 3")
    H, A, C, D = heat_newton_coefficients(norm(x), t)
    if alpha.order == 0:
        return _scalar(H)
    return _scalar(_component(radial_tensor(x, alpha.order, A, C, D), alpha))


__all__ = [
    "newton", "oseen_scalar", "oseen_resolvent_scalar", "heat_kernel", "psi",
    "psi_prime", "phi", "phi_tensors", "heat_newton", "heat_newton_coefficients",
    "exp1", "radial_tensor", "newton_coefficients", "r_minus_x1",
    "SingularPointError",
]
