"""Verification suites behind ``rotoseen verify``.

Each suite returns a list of :class:`Check` rows in a fixed order.  A check
passes when ``err <= tol``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import PhysParams
from .expansion import (DEFAULT_RADII, DEFAULT_RAYS, beta_coefficients, decay_fit,
                        leading_term, manufactured_flow, ray_points, remainder_G,
                        forced_velocity)
from .fourier_verify import GaussianTestFn, PairingQuadrature, kernel_function, pairing_check
from .oseen_tensor import oseen_velocity_tensors
from .stokes_rotating import TimeQuadratureConfig, z_tensor


@dataclass(frozen=True)
class Check:
    name: str
    lhs: object
    rhs: object
    err: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.err <= self.tol)


SUITES = ("identity", "fourier", "decay", "expansion")

# Gaussian test functions for the pairings.  Every shift has three nonzero
# components: with b on the x1-axis the off-diagonal pairings vanish by
# reflection symmetry and a relative error means nothing.
TEST_FUNCTIONS = (
    GaussianTestFn(0.5, (0.3, 0.4, -0.2)),
    GaussianTestFn(1.0, (-0.5, 0.2, 0.3)),
    GaussianTestFn(2.0, (0.2, -0.3, 0.6)),
)

# Manufactured flow of the expansion checks.
FLOW_SETUP = dict(y0=(0.3, 0.0, 0.0), c=(1.0, 0.0, 0.0), eps=0.25, S0=2.0)
CLOSURE_POINTS = (
    (3.0, 0.0, 0.0), (-4.0, 0.0, 0.0), (0.0, 3.5, 0.0), (0.0, 0.0, -5.0), (6.0, 2.0, 0.0),
    (-3.0, 3.0, 3.0), (10.0, 0.0, 1.0), (-12.0, 5.0, 0.0), (4.0, -4.0, 2.0), (20.0, 0.0, 0.0),
)


def identity_grid(n_radii: int = 10):
    radii = np.geomspace(2.0, 40.0, n_radii)
    return [x for pts in ray_points(DEFAULT_RAYS, radii).values() for x in pts]


def run_identity(p: PhysParams, cfg: TimeQuadratureConfig | None = None, tol: float = 1e-6):
    """``Z_j1(x, 0)`` against ``E_j1(x)`` on 50 points, entries with
    ``|E_j1| > 1e-12``."""
    rows = []
    for x in identity_grid():
        z = z_tensor(x, np.zeros(3), p, cfg).value[:, 0]
        e = oseen_velocity_tensors(x, p)[0][:, 0]
        tag = ",".join(f"{v:.6g}" for v in x)
        for j in range(3):
            if abs(e[j]) > 1e-12:
                rows.append(Check(f"Z{j + 1}1=E{j + 1}1@({tag})", z[j], e[j],
                                  abs(z[j] - e[j]) / abs(e[j]), tol))
    return rows


def _pairing_cases(p):
    one = dict(t=1.0)
    cases = [("N", "newton", 0, 0, {}), ("O", "oseen", 0, 0, {}),
             ("O_lambda", "resolvent", 0, 0, dict(lam=1.0)), ("K", "heat", 0, 0, one)]
    cases += [(f"T{j + 1}{k + 1}", "stokes", j, k, one) for j, k in ((0, 0), (0, 1), (1, 2))]
    cases += [(f"Gamma{j + 1}1", "gamma_col1", j, 0, one) for j in range(3)]
    cases += [(f"E{j + 1}1", "oseen_tensor", j, 0, {}) for j in range(3)]
    return cases


Z_PAIRING_QUAD = PairingQuadrature(radial_nodes=8, panel_width=2.0, n_theta=24, n_phi=64)


def run_fourier(p: PhysParams, cfg: TimeQuadratureConfig | None = None,
                tol_closed: float = 1e-4, tol_z: float = 1e-3, include_z: bool = True):
    rows = []
    for label, kind, j, k, kw in _pairing_cases(p):
        g = kernel_function(kind, j, k, p, **kw)
        for i, phi in enumerate(TEST_FUNCTIONS):
            rep = pairing_check(g, kind, phi, j, k, p, quad=PairingQuadrature(check=False), **kw)
            rows.append(Check(f"pairing/{label}/phi{i + 1}", rep.lhs, rep.rhs, rep.rel_err, tol_closed))
    if include_z:
        zc = kernel_function("z_col1", p=p, cfg=cfg)
        for j in range(3):
            for i, phi in enumerate(TEST_FUNCTIONS):
                rep = pairing_check(zc, "z_col1", phi, j, 0, p, quad=Z_PAIRING_QUAD)
                rows.append(Check(f"pairing/Z{j + 1}1/phi{i + 1}", rep.lhs, rep.rhs, rep.rel_err, tol_z))
    return rows


def z_decay_fits(p: PhysParams, cfg=None, rays=DEFAULT_RAYS, radii=DEFAULT_RADII):
    """Per-ray fits of ``|Z_.1|``, ``|Z_.{2,3}|`` and their x-gradients."""
    out = {}
    for ray, pts in ray_points(rays, radii).items():
        s = {"col1": [], "col23": [], "grad_col1": [], "grad_col23": []}
        for x in pts:
            z = z_tensor(x, np.zeros(3), p, cfg, want_x_grad=True)
            s["col1"].append((x, np.linalg.norm(z.value[:, 0])))
            s["col23"].append((x, np.linalg.norm(z.value[:, 1:])))
            s["grad_col1"].append((x, np.linalg.norm(z.x_gradient[:, 0, :])))
            s["grad_col23"].append((x, np.linalg.norm(z.x_gradient[:, 1:, :])))
        out[ray] = {key: decay_fit(v) for key, v in s.items()}
    return out


def _ray_tag(ray):
    return "(" + ",".join(f"{v:.4g}" for v in ray) + ")"


def run_decay(p: PhysParams, cfg=None):
    rows = []
    for ray, f in z_decay_fits(p, cfg).items():
        tag = _ray_tag(ray)
        s1, s23 = f["col1"].slope, f["col23"].slope
        g1, g23 = f["grad_col1"].slope, f["grad_col23"].slope
        rows.append(Check(f"slope/col1{tag}", s1, -1.0, abs(s1 + 1.0), 0.15))
        rows.append(Check(f"slope/col23{tag}", s23, -1.4, max(0.0, s23 + 1.4), 0.0))
        rows.append(Check(f"slope/grad_col1{tag}", g1, s1 - 0.35, max(0.0, g1 - s1 + 0.35), 0.0))
        rows.append(Check(f"slope/grad_col23{tag}", g23, s23 - 0.35, max(0.0, g23 - s23 + 0.35), 0.0))
    return rows


def coefficient_checks(co, co2, c):
    """``co`` and ``co2`` come from the spheres of radius S0 and 1.5 S0."""
    c = np.asarray(c, dtype=float)
    rows = [Check(f"beta{k + 1}=c{k + 1}", co.beta[k], c[k], abs(co.beta[k] - c[k]), 1e-3) for k in range(3)]
    rows.append(Check("flux", co.flux, 0.0, abs(co.flux), 1e-6))
    rows += [Check(f"beta{k + 1}(1.5 S0)", co2.beta[k], co.beta[k], abs(co2.beta[k] - co.beta[k]), 1e-3)
             for k in range(3)]
    return rows


def closure_checks(flow, force, co, p: PhysParams, cfg=None):
    rows = []
    for x in CLOSURE_POINTS:
        x = np.asarray(x, dtype=float)
        u = forced_velocity(x, force, p, cfg)
        lead, fl = leading_term(x, co, p)
        rhs = lead + fl + remainder_G(x, flow, p, cfg, co)
        tag = ",".join(f"{v:.6g}" for v in x)
        rows.append(Check(f"closure@({tag})", float(np.linalg.norm(u)), float(np.linalg.norm(rhs)),
                          float(np.linalg.norm(u - rhs) / np.linalg.norm(u)), 1e-3))
    for ray, pts in ray_points().items():
        fit = decay_fit([(x, np.linalg.norm(remainder_G(x, flow, p, cfg, co))) for x in pts])
        rows.append(Check(f"slope/G{_ray_tag(ray)}", fit.slope, -1.4, max(0.0, fit.slope + 1.4), 0.0))
    return rows


def run_expansion(p: PhysParams, cfg=None):
    s = FLOW_SETUP
    flow, force = manufactured_flow(s["y0"], s["c"], s["eps"], s["S0"], p, cfg, return_force=True)
    co = beta_coefficients(flow, p)
    co2 = beta_coefficients(manufactured_flow(s["y0"], s["c"], s["eps"], 1.5 * s["S0"], p, cfg), p)
    return coefficient_checks(co, co2, s["c"]) + closure_checks(flow, force, co, p, cfg)


def run_suite(name: str, p: PhysParams, cfg: TimeQuadratureConfig | None = None):
    runners = {"identity": run_identity, "fourier": run_fourier, "decay": run_decay,
               "expansion": run_expansion}
    return runners[name](p, cfg)


__all__ = ["Check", "SUITES", "TEST_FUNCTIONS", "FLOW_SETUP", "CLOSURE_POINTS", "identity_grid",
           "run_identity", "run_fourier", "run_decay", "run_expansion", "run_suite",
           "z_decay_fits", "Z_PAIRING_QUAD"]
