"""Time-dependent Stokes tensor ``T``, the rotating-frame kernel ``Gamma`` and
the steady kernel ``Z(x, y) = int_0^inf Gamma(x, y, t) dt``.

The time integral is split at a cut ``t_c`` beyond which the heat-kernel
corrections to ``T`` are below ``exp(-40)`` relative, so that ``T`` equals the
Hessian of the Newton potential.  On ``[0, t_c]`` a vectorised adaptive
Gauss-Kronrod rule runs on panels aligned with the near-field scale
``|x - y|^2``, the wake crossing time and the half periods of the rotation.
On ``[t_c, inf)`` the integrand is expanded in harmonics of the rotation
angle; the mean is integrated after the substitution ``t = t_c / v`` and each
oscillating harmonic along a rotated contour with Gauss-Laguerre nodes.

Gradients are returned with the derivative axis last:
``x_gradient[j, k, l] = d/dx_l Z_jk`` and ``y_gradient[j, k, l] = d/dy_l Z_jk``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.laguerre import laggauss
from numpy.polynomial.legendre import leggauss

from .core import MultiIndex, PhysParams, as_point, norm, rotation_from_angle
from .errors import CoincidenceError, DomainError, NonConvergenceError
from .scalar_kernels import heat_newton_coefficients, newton_coefficients, radial_tensor

_I3 = np.eye(3)
_EPS = np.finfo(float).eps
COINCIDENCE_TOL = 1e-12
# far-field regime: q^2 = |z|^2/(4t) >= this value for all t >= t_c
_Q2_FAR = 40.0
_N_HARMONICS = 8
_LAGUERRE = (16, 12)
_TAIL_GL = (24, 16)
_MAX_PANELS = 40000
_CHUNK_ELEMS = 400_000


@dataclass(frozen=True)
class TimeQuadratureConfig:
    """Tolerances and budget of the time quadrature.

    ``max_subdivisions`` bounds the number of refinement sweeps of the
    adaptive rule (each sweep bisects every panel with a large error share).
    ``tail_safety`` scales the required accuracy of the tail part relative
    to ``abs_tol``.
    """

    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_subdivisions: int = 60
    tail_safety: float = 10.0

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("quadrature tolerances must be positive")
        if int(self.max_subdivisions) < 10:
            raise DomainError("max_subdivisions must be at least 10")
        if not self.tail_safety >= 1.0:
            raise DomainError("tail_safety must be >= 1")


@dataclass(frozen=True)
class KernelMatrixValue:
    value: np.ndarray
    x_gradient: np.ndarray | None = None
    y_gradient: np.ndarray | None = None
    estimated_error: float = 0.0


# ------------------------------------------------------------------ T, Gamma

def heat_kernel_value(r2, t):
    return (4.0 * math.pi * t) ** -1.5 * np.exp(-r2 / (4.0 * t))


def stokes_T_tensors(z, t, with_gradient=False):
    """``T(z, t)`` (..., 3, 3) and optionally ``d_l T_jk`` at [..., j, k, l]."""
    z = np.asarray(z, dtype=float)
    t = np.asarray(t, dtype=float)
    r = norm(z)
    K = heat_kernel_value(r * r, t)
    _, A, C, D = heat_newton_coefficients(r, t, want_value=False)
    T = (K + A)[..., None, None] * _I3 + C[..., None, None] * (z[..., :, None] * z[..., None, :])
    if not with_gradient:
        return T, None
    dT = radial_tensor(z, 3, C=C, D=D)
    dK = -z * (K / (2.0 * t))[..., None]
    dT = dT + _I3[:, :, None] * dK[..., None, None, :]
    return T, dT


def _check_t(t):
    t = float(t)
    if not t > 0.0:
        raise DomainError(f"time must be positive, got {t}")
    return t


def stokes_T(x, t, alpha=None, l: int = 0):
    """``d_t^l d_x^alpha T(x, t)`` as a 3x3 array, ``|alpha| + l <= 1``.

    ``T_jk = delta_jk K + d_j d_k (N * K)``; the time derivative uses
    ``d_t (N * K) = -K``, giving ``d_t T = delta Lap K - grad grad K``.
    """
    x = as_point(x)
    t = _check_t(t)
    alpha = MultiIndex.of(alpha)
    if alpha.order + l > 1 or l < 0:
        raise DomainError("stokes_T supports the value and one first derivative")
    if l == 1:
        K = heat_kernel_value(float(x @ x), t)
        hessK = K * (np.outer(x, x) / (4.0 * t * t) - _I3 / (2.0 * t))
        return np.trace(hessK) * _I3 - hessK
    T, dT = stokes_T_tensors(x, t, with_gradient=alpha.order == 1)
    if alpha.order == 0:
        return T
    return dT[..., alpha.axes()[0]]


def _drifted_point(x, y, t, p):
    R = rotation_from_angle(-p.rho * t)
    return x - p.tau * t * _I3[0] - R @ y, R


def gamma(x, y, t, p: PhysParams, alpha=None):
    """``Gamma(x, y, t) = T(x - tau t e1 - R(-t) y, t) R(-t)`` or its
    first x-derivative."""
    x, y = as_point(x), as_point(y, "y")
    t = _check_t(t)
    alpha = MultiIndex.of(alpha)
    if alpha.order > 1:
        raise DomainError("gamma supports x-derivatives of order <= 1")
    z, R = _drifted_point(x, y, t, p)
    T, dT = stokes_T_tensors(z, t, with_gradient=alpha.order == 1)
    if alpha.order == 0:
        return T @ R
    return dT[..., alpha.axes()[0]] @ R


# --------------------------------------------------------- aggregated sources

class SourceIntegrand:
    """``t -> sum_s Gamma(x, y_s, t)``-type integrands, contracted on the fly.

    ``Wv`` (n, 3, m): the value block is ``sum_s Gamma(x, y_s, t) Wv_s``
    (shape (3, m)); with ``want_xgrad`` its x-gradient (3, 3, m) is added,
    index order [j, l, m].  ``Wy`` (n, 3, 3, m'): block
    ``sum_s sum_kl d/dy_l Gamma_jk(x, y_s, t) Wy_s[k, l]`` (shape (3, m')).

    Sums run in the co-rotating frame: with ``R = R(-t)`` and
    ``zeta = R^T x - tau t e1 - y`` one has ``Gamma = R T(zeta)``, so the
    source sums are plain matrix products and ``R`` is applied once per
    time node.
    """

    def __init__(self, x, ys, p: PhysParams, Wv=None, Wy=None, want_xgrad=False):
        self.x = as_point(x)
        self.ys = np.atleast_2d(as_point(ys, "y"))
        self.p = p
        self.Wv = None if Wv is None else np.asarray(Wv, dtype=float)
        self.Wy = None if Wy is None else np.asarray(Wy, dtype=float)
        self.want_xgrad = bool(want_xgrad) and self.Wv is not None
        n = len(self.ys)
        self.shapes = []
        if self.Wv is not None:
            if self.Wv.shape[:2] != (n, 3):
                raise ValueError("Wv must have shape (n_sources, 3, m)")
            mv = self.Wv.shape[2]
            self.shapes.append(("value", (3, mv)))
            if self.want_xgrad:
                self.shapes.append(("x_gradient", (3, 3, mv)))
        if self.Wy is not None:
            if self.Wy.shape[:3] != (n, 3, 3):
                raise ValueError("Wy must have shape (n_sources, 3, 3, m)")
            self.trWy = np.einsum("naam->nm", self.Wy)
            self.shapes.append(("y_gradient", (3, self.Wy.shape[3])))
        self.size = sum(int(np.prod(s)) for _, s in self.shapes)
        self.dist = norm(self.x - self.ys)

    def split(self, flat):
        out, i = {}, 0
        for name, shape in self.shapes:
            k = int(np.prod(shape))
            out[name] = flat[..., i:i + k].reshape(flat.shape[:-1] + shape)
            i += k
        return out

    def _contract(self, zeta, R, K, A, C, D, t):
        """Blocks for nodes ``t``; ``zeta`` (P, n, 3), coefficients (P, n)."""
        P = zeta.shape[0]
        blocks = []
        Kh = K / (2.0 * t)[:, None]
        zT = np.swapaxes(zeta, 1, 2)  # (P, 3, n)
        if self.Wv is not None:
            mv = self.Wv.shape[2]
            val = np.empty((P, 3, mv), dtype=zeta.dtype)
            grad = np.empty((P, 3, 3, mv), dtype=zeta.dtype) if self.want_xgrad else None
            for m in range(mv):
                w = self.Wv[:, :, m]  # (n, 3)
                zw = np.einsum("pna,na->pn", zeta, w)
                loc = (K + A) @ w + np.einsum("pan,pn->pa", zT, C * zw)
                val[:, :, m] = np.einsum("pab,pb->pa", R, loc)
                if grad is not None:
                    # G_ab = sum_n (C-Kh) w_a z_b + C z_a w_b + C delta_ab (z.w) + D z_a z_b (z.w)
                    g = w.T @ ((C - Kh)[..., None] * zeta)
                    g = g + np.swapaxes(w.T @ (C[..., None] * zeta), 1, 2)
                    g = g + zT @ (zeta * (D * zw)[..., None])
                    g = g + np.einsum("pn,pn->p", C, zw)[:, None, None] * _I3
                    grad[:, :, :, m] = R @ g @ np.swapaxes(R, 1, 2)
            blocks.append(val.reshape(P, -1))
            if grad is not None:
                blocks.append(grad.reshape(P, -1))
        if self.Wy is not None:
            my = self.Wy.shape[3]
            yg = np.empty((P, 3, my), dtype=zeta.dtype)
            n = zeta.shape[1]
            for m in range(my):
                W = self.Wy[:, :, :, m]  # (n, 3, 3) [k, l]
                # sum_n a_n W_n zeta_n and sum_n b_n W_n^T zeta_n via one matmul each
                X1 = ((C - Kh)[..., None] * zeta).reshape(P, n * 3)
                X2 = (C[..., None] * zeta).reshape(P, n * 3)
                Wz = X1 @ np.swapaxes(W, 1, 2).reshape(n * 3, 3)  # sum W[k,l] X1[l]
                Wtz = X2 @ W.reshape(n * 3, 3)  # sum W[k,l] X2[k] -> index l
                zWz = np.einsum("pnk,nkl,pnl->pn", zeta, W, zeta)
                coef = C * self.trWy[None, :, m] + D * zWz
                loc = Wz + Wtz + np.einsum("pan,pn->pa", zT, coef)
                yg[:, :, m] = -np.einsum("pab,pb->pa", R, loc)
            blocks.append(yg.reshape(P, -1))
        return np.concatenate(blocks, axis=1)

    def _chunks(self, npts):
        step = max(1, _CHUNK_ELEMS // max(1, len(self.ys)))
        for i in range(0, npts, step):
            yield slice(i, min(npts, i + step))

    def _zeta(self, t, theta):
        R = rotation_from_angle(-theta)
        xr = np.einsum("pab,a->pb", R, self.x)  # R^T x
        base = xr - self.p.tau * t[:, None] * _I3[0]
        return base[:, None, :] - self.ys[None, :, :], R

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.empty((len(t), self.size))
        need_d = self.want_xgrad or self.Wy is not None
        for sl in self._chunks(len(t)):
            tt = t[sl]
            zeta, R = self._zeta(tt, self.p.rho * tt)
            r = norm(zeta)
            K = heat_kernel_value(r * r, tt[:, None])
            _, A, C, D = heat_newton_coefficients(r, tt[:, None], want_value=False)
            if not need_d:
                D = np.zeros_like(C)
            out[sl] = self._contract(zeta, R, K, A, C, D, tt)
        return out

    def far_field(self, t, theta):
        """Large-time form with complex ``t`` allowed; ``theta`` stands for
        ``rho * t`` in the rotation (harmonic variable)."""
        t = np.asarray(t, dtype=complex)
        theta = np.asarray(theta, dtype=float)
        out = np.empty((len(t), self.size), dtype=complex)
        for sl in self._chunks(len(t)):
            tt = t[sl]
            zeta, R = self._zeta(tt, theta[sl])
            r = np.sqrt(np.sum(zeta * zeta, axis=-1))
            _, A, C, D = newton_coefficients(r)
            out[sl] = self._contract(zeta, R, np.zeros_like(A), A, C, D, tt)
        return out


# -------------------------------------------------------------- quadrature

def _gk15():
    xk = np.array([0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                   0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                   0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                   0.207784955007898467600689403773245, 0.0])
    wk = np.array([0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                   0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                   0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                   0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
    wg = np.array([0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                   0.381830050505118944950369775488975, 0.417959183673469387755102040816327])
    nodes = np.concatenate([-xk[:7], [0.0], xk[6::-1]])
    wkf = np.concatenate([wk[:7], [wk[7]], wk[6::-1]])
    wgf = np.zeros(15)
    wgf[[1, 3, 5]] = wg[:3]
    wgf[7] = wg[3]
    wgf[[13, 11, 9]] = wg[:3]
    return nodes, wkf, wgf


_GK_X, _GK_WK, _GK_WG = _gk15()


def _gk_panels(f, a, b):
    """Kronrod result, QUADPACK error estimate and ``int |f|`` per panel."""
    hl = 0.5 * (b - a)
    c = 0.5 * (a + b)
    t = (c[:, None] + hl[:, None] * _GK_X[None, :]).ravel()
    fv = f(t).reshape(len(a), 15, -1)
    resk = np.einsum("k,pkm->pm", _GK_WK, fv)
    resg = np.einsum("k,pkm->pm", _GK_WG, fv)
    mean = 0.5 * resk
    resasc = np.einsum("k,pkm->pm", _GK_WK, np.abs(fv - mean[:, None, :]))
    resabs = np.einsum("k,pkm->pm", _GK_WK, np.abs(fv))
    h = hl[:, None]
    resk, resasc, resabs = resk * h, resasc * h, resabs * h
    err = np.abs((resk - resg * h))
    with np.errstate(invalid="ignore", divide="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where((resasc > 0) & (err > 0), scaled, err)
    err = np.where(resabs > 1e-290, np.maximum(50.0 * _EPS * resabs, err), err)
    return resk, err, resabs


def adaptive_gk(f, edges, rel_tol, abs_tol, max_rounds):
    """Globally adaptive G7-K15 over consecutive panels given by ``edges``.

    Returns ``(integral, error, converged)`` for the vector-valued ``f``.
    A component is converged when its summed error is below
    ``max(abs_tol, rel_tol |I|)`` (or the round-off floor of the rule).
    """
    a, b = np.asarray(edges[:-1], float), np.asarray(edges[1:], float)
    res, err, rabs = _gk_panels(f, a, b)
    for sweep in range(max_rounds + 1):
        I = res.sum(0)
        E = err.sum(0)
        tol = np.maximum(np.maximum(abs_tol, rel_tol * np.abs(I)), 100.0 * _EPS * rabs.sum(0))
        if np.all(E <= tol):
            return I, E, True
        if sweep == max_rounds or len(a) > _MAX_PANELS:
            break
        score = np.max(err / tol, axis=1)
        mark = score > min(1.0 / len(a), 0.25 * score.max())
        mid = 0.5 * (a[mark] + b[mark])
        na = np.concatenate([a[mark], mid])
        nb = np.concatenate([mid, b[mark]])
        r2, e2, ab2 = _gk_panels(f, na, nb)
        keep = ~mark
        a = np.concatenate([a[keep], na])
        b = np.concatenate([b[keep], nb])
        res = np.concatenate([res[keep], r2])
        err = np.concatenate([err[keep], e2])
        rabs = np.concatenate([rabs[keep], ab2])
    return res.sum(0), err.sum(0), False


def tail_cut(x, ys, p: PhysParams) -> float:
    """Start of the far-field regime of the time integral.

    Requires ``(tau t - D)^2 >= 4 q2 t`` with ``D = |x| + max|y|`` and leaves
    room ``3 s_max`` between the branch points of the far-field form and
    the Laguerre contour of the largest reach ``s_max``.
    """
    D = float(norm(x) + (np.max(norm(ys)) if len(ys) else 0.0))
    tau = p.tau
    u = (2.0 * math.sqrt(_Q2_FAR) + math.sqrt(4.0 * _Q2_FAR + 4.0 * tau * D)) / (2.0 * tau)
    t1 = u * u
    s_max = laggauss(_LAGUERRE[0])[0][-1] / abs(p.rho)
    t2 = D / tau + 3.0 * s_max
    return max(t1, t2, 1.0)


def time_breakpoints(x, ys, p: PhysParams, t_c: float) -> np.ndarray:
    """Initial panel edges on ``[0, t_c]``."""
    d = norm(x - ys)
    pts = [0.0, t_c]
    for s in (d.min(), d.max()):
        pts.extend(s * s * 4.0 ** np.arange(-3, 4))
    # times at which the drifted point passes the sources
    x1 = x[0] - ys[:, 0]
    perp = math.sqrt(x[1] ** 2 + x[2] ** 2)
    lo, hi = x1.min() / p.tau, x1.max() / p.tau
    if hi > 0:
        for ts in np.unique([max(lo, 0.0), hi]):
            w = math.sqrt(perp ** 2 + max(ts, 1e-3)) / p.tau
            pts.extend(ts + w * np.array([-4, -2, -1, -0.5, -0.25, 0, 0.25, 0.5, 1, 2, 4]))
        if hi - lo > 0:
            pts.extend(np.linspace(max(lo, 0.0), hi, 5))
    hp = p.half_period
    pts.extend(hp * np.arange(1, int(t_c / hp) + 1))
    e = np.unique(np.clip(np.asarray(pts, dtype=float), 0.0, t_c))
    keep = np.concatenate([[True], np.diff(e) > 1e-12 * t_c])
    e = e[keep]
    e[-1] = t_c
    return e


def _tail_integral(src: SourceIntegrand, p: PhysParams, t_c: float):
    """``int_{t_c}^inf`` of the far-field form; returns (value, error)."""
    M = _N_HARMONICS
    theta_k = 2.0 * math.pi * np.arange(M) / M

    def harmonics(t, m_list):
        # a_m(t) = (1/M) sum_k g(t, theta_k) exp(-i m theta_k)
        T = np.repeat(np.asarray(t, dtype=complex), M)
        TH = np.tile(theta_k, len(t))
        g = src.far_field(T, TH).reshape(len(t), M, -1)
        ph = np.exp(-1j * np.outer(m_list, theta_k)) / M
        return np.einsum("mk,tkc->mtc", ph, g)

    def mean_part(n):
        v, w = leggauss(n)
        v, w = 0.5 * (v + 1.0), 0.5 * w
        a0 = harmonics(t_c / v, [0])[0]
        return np.einsum("t,tc->c", w * t_c / v ** 2, a0).real

    I0 = mean_part(_TAIL_GL[0])
    err = np.abs(I0 - mean_part(_TAIL_GL[1]))
    sgn = 1.0 if p.rho > 0 else -1.0
    osc = np.zeros_like(I0)
    for m in (1, 2, 3):
        om = m * abs(p.rho)
        vals = []
        for n in _LAGUERRE:
            xl, wl = laggauss(n)
            am = harmonics(t_c + 1j * sgn * xl / om, [m])[0]
            vals.append((1j * sgn / om) * np.exp(1j * m * p.rho * t_c) * (wl @ am))
        osc += 2.0 * vals[0].real
        err += 2.0 * np.abs(vals[0] - vals[1])
        if m == 3:
            err += 2.0 * np.abs(vals[0])
    return I0 + osc, err


def integrate_sources(src: SourceIntegrand, p: PhysParams, cfg: TimeQuadratureConfig | None = None):
    """``int_0^inf`` of an aggregated integrand; returns (value, error)."""
    cfg = cfg or TimeQuadratureConfig()
    if np.any(src.dist < COINCIDENCE_TOL):
        raise CoincidenceError("Z(x, y) is singular for x = y")
    t_c = tail_cut(src.x, src.ys, p)
    edges = time_breakpoints(src.x, src.ys, p, t_c)
    I, E, ok = adaptive_gk(src, edges, cfg.rel_tol, cfg.abs_tol, int(cfg.max_subdivisions))
    It, Et = _tail_integral(src, p, t_c)
    total, err = I + It, E + Et
    tail_tol = np.maximum(cfg.abs_tol, cfg.rel_tol * np.abs(total)) * cfg.tail_safety
    if not ok or np.any(Et > tail_tol):
        raise NonConvergenceError(
            f"time quadrature did not reach the tolerance (max error {err.max():.3e})",
            value=total, estimated_error=float(err.max()))
    return total, err


def z_tensor(x, y, p: PhysParams, cfg: TimeQuadratureConfig | None = None,
             want_x_grad: bool = False, want_y_grad: bool = False) -> KernelMatrixValue:
    """Steady rotating-frame kernel ``Z(x, y)`` with optional gradients."""
    x, y = as_point(x), as_point(y, "y")
    if float(norm(x - y)) < COINCIDENCE_TOL:
        raise CoincidenceError("Z(x, y) is singular for x = y")
    Wv = _I3[None]
    Wy = np.eye(9).reshape(1, 3, 3, 9) if want_y_grad else None
    src = SourceIntegrand(x, y[None], p, Wv=Wv, Wy=Wy, want_xgrad=want_x_grad)
    val, err = integrate_sources(src, p, cfg)
    parts = src.split(val)
    xg = parts["x_gradient"].transpose(0, 2, 1) if want_x_grad else None  # [j,l,k] -> [j,k,l]
    yg = parts["y_gradient"].reshape(3, 3, 3) if want_y_grad else None
    return KernelMatrixValue(value=parts["value"], x_gradient=xg, y_gradient=yg,
                             estimated_error=float(err.max()))


# ------------------------------------------------------ fast path for y = 0

def _euler_sum(terms):
    """Sum of an alternating series by repeated averaging of partial sums."""
    s = np.cumsum(terms, axis=0)
    levels = [s]
    while len(s) > 2:
        s = 0.5 * (s[1:] + s[:-1])
        levels.append(s)
    return levels[-1][-1], np.abs(levels[-1][-1] - levels[-2][-1])


def z_at_origin(x, p: PhysParams, cfg: TimeQuadratureConfig | None = None, alpha=None,
                return_error: bool = False):
    """``d_x^alpha Z(x, 0)`` for ``|alpha| <= 1`` by a route independent of
    :func:`z_tensor`.

    With ``y = 0`` the rotation only mixes columns 2 and 3 through
    ``cos(rho t)`` and ``sin(rho t)``.  Panels follow the half periods, each
    integrated with paired Gauss-Legendre rules (20 and 13 nodes) that are
    refined until the pairs agree.  Column 1 has a closed-form tail; the
    oscillating columns' tail is an alternating series over half periods,
    summed with the Euler transform.
    """
    cfg = cfg or TimeQuadratureConfig()
    x = as_point(x)
    alpha = MultiIndex.of(alpha)
    if alpha.order > 1:
        raise DomainError("z_at_origin supports derivative order <= 1")
    if float(norm(x)) < COINCIDENCE_TOL:
        raise CoincidenceError("Z(x, 0) is singular at x = 0")
    lax = alpha.axes()[0] if alpha.order else None
    tau, rho = p.tau, p.rho
    hp = p.half_period

    def integrand(t):
        z = x - tau * t[:, None] * _I3[0]
        T, dT = stokes_T_tensors(z, t, with_gradient=lax is not None)
        M = T if lax is None else dT[..., lax]
        c, s = np.cos(rho * t), np.sin(rho * t)
        out = np.empty_like(M)
        out[..., 0] = M[..., 0]
        out[..., 1] = M[..., 1] * c[:, None] - M[..., 2] * s[:, None]
        out[..., 2] = M[..., 1] * s[:, None] + M[..., 2] * c[:, None]
        return out.reshape(len(t), 9)

    rules = [leggauss(n) for n in (20, 13)]

    def panel_sums(a, b, rule):
        xg, wg = rule
        hl, c = 0.5 * (b - a), 0.5 * (b + a)
        t = (c[:, None] + hl[:, None] * xg).ravel()
        f = integrand(t).reshape(len(a), len(xg), 9)
        return np.einsum("k,pkm->pm", wg, f) * hl[:, None]

    t_c = math.ceil(tail_cut(x, np.zeros((1, 3)), p) / hp) * hp
    edges = time_breakpoints(x, np.zeros((1, 3)), p, t_c)
    a, b = edges[:-1], edges[1:]
    hi = panel_sums(a, b, rules[0])
    lo = panel_sums(a, b, rules[1])
    for _ in range(int(cfg.max_subdivisions)):
        I = hi.sum(0)
        e = np.abs(hi - lo)
        tol = np.maximum(cfg.abs_tol, cfg.rel_tol * np.abs(I))
        if np.all(e.sum(0) <= tol):
            break
        score = np.max(e / tol, axis=1)
        mark = score > min(1.0 / len(a), 0.25 * score.max())
        mid = 0.5 * (a[mark] + b[mark])
        na, nb = np.concatenate([a[mark], mid]), np.concatenate([mid, b[mark]])
        keep = ~mark
        a, b = np.concatenate([a[keep], na]), np.concatenate([b[keep], nb])
        hi = np.concatenate([hi[keep], panel_sums(na, nb, rules[0])])
        lo = np.concatenate([lo[keep], panel_sums(na, nb, rules[1])])
    # half-period contributions summed in adjacent pairs
    order = np.argsort(a)
    contrib = hi[order]
    if len(contrib) % 2:
        contrib = np.vstack([contrib, np.zeros((1, 9))])
    main = (contrib[0::2] + contrib[1::2]).sum(0)
    err = np.abs(hi - lo).sum(0)

    # column 1 tail: T -> Hessian of N, integrated exactly along the drift
    zc = x - tau * t_c * _I3[0]
    _, A, C, D = newton_coefficients(norm(zc))
    if lax is None:
        col1 = (A * zc) / tau
    else:
        col1 = (A * _I3[lax] + C * zc[lax] * zc) / tau
    # columns 2, 3 tail: alternating half-period series
    n_tail = 24
    ta = t_c + hp * np.arange(n_tail)
    series = panel_sums(ta, ta + hp, rules[0])
    tail23, tail_err = _euler_sum(series)
    tail = tail23.copy()
    tail.reshape(3, 3)[:, 0] = col1
    total = (main + tail).reshape(3, 3)
    err = (err + tail_err).reshape(3, 3)
    err[:, 0] -= tail_err.reshape(3, 3)[:, 0]
    tol = np.maximum(cfg.abs_tol, cfg.rel_tol * np.abs(total)) * cfg.tail_safety
    if np.any(err > tol):
        raise NonConvergenceError(
            f"time quadrature for Z(x, 0) did not converge (max error {err.max():.3e})",
            value=total, estimated_error=float(err.max()))
    if return_error:
        return total, float(err.max())
    return total


__all__ = [
    "TimeQuadratureConfig", "KernelMatrixValue", "stokes_T", "stokes_T_tensors", "gamma",
    "z_tensor", "z_at_origin", "SourceIntegrand", "integrate_sources", "adaptive_gk",
    "tail_cut", "time_breakpoints",
]
