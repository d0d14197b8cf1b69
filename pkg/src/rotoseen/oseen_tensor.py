"""Velocity and pressure parts of the Oseen fundamental solution."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import MultiIndex, PhysParams, as_point, require_nonzero, wake_weight
from .errors import DomainError
from .scalar_kernels import FOUR_PI, phi_tensors

_I3 = np.eye(3)


@dataclass(frozen=True)
class OseenTensorValue:
    """``velocity[..., j, k] = E_jk``, ``pressure[..., k] = E_4k`` and, when
    requested, ``velocity_gradient[..., j, k, l] = d_l E_jk``."""

    velocity: np.ndarray
    pressure: np.ndarray
    velocity_gradient: np.ndarray | None = None


def oseen_velocity_tensors(x, p: PhysParams, with_gradient: bool = False):
    """Arrays ``E`` (..., 3, 3) and optionally ``dE`` (..., 3, 3, 3)."""
    tens = phi_tensors(x, p, 3 if with_gradient else 2)
    hess = tens[2]
    lap = np.trace(hess, axis1=-2, axis2=-1)
    E = lap[..., None, None] * _I3 - hess
    if not with_gradient:
        return E, None
    third = tens[3]
    grad_lap = np.einsum("...mml->...l", third)
    dE = _I3[:, :, None] * grad_lap[..., None, None, :] - third
    return E, dE


def oseen_E(x, p: PhysParams, with_gradient: bool = False) -> OseenTensorValue:
    """Oseen tensor ``E_jk = (delta_jk Lap - d_j d_k) Phi`` at ``x != 0``.

    The Laplacian is the trace of the closed-form Hessian of ``Phi``, so the
    result is symmetric entry for entry.
    """
    x = as_point(x)
    require_nonzero(x, "Oseen tensor")
    E, dE = oseen_velocity_tensors(x, p, with_gradient)
    return OseenTensorValue(velocity=E, pressure=oseen_pressure(x), velocity_gradient=dE)


def oseen_pressure(x) -> np.ndarray:
    """``E_4k(x) = x_k / (4 pi |x|^3)``."""
    x = as_point(x)
    r = require_nonzero(x, "Oseen pressure")
    return x / (FOUR_PI * r ** 3)[..., None]


def oseen_decay_envelope(x, alpha=None):
    """Shape ``(|x| s(x))^(-1-|a|/2) * max(1, |x|^(-|a|/2))`` of the decay
    bound for ``d^alpha E`` (no constant)."""
    x = as_point(x)
    alpha = MultiIndex.of(alpha)
    if alpha.order > 1:
        raise DomainError("decay envelope is defined for derivative order <= 1")
    r = require_nonzero(x, "decay envelope")
    half = 0.5 * alpha.order
    env = (r * wake_weight(x)) ** (-1.0 - half) * np.maximum(1.0, r ** (-half))
    return float(env) if np.ndim(env) == 0 else env


__all__ = ["OseenTensorValue", "oseen_E", "oseen_pressure", "oseen_decay_envelope",
           "oseen_velocity_tensors"]
