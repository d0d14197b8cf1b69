"""Shared geometry: physical parameters, points, the wake weight and the
rotation about the x1-axis.

Points are plain ``numpy`` arrays whose last axis has length 3; every
function here broadcasts over leading axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, SingularPointError

E1 = np.array([1.0, 0.0, 0.0])


@dataclass(frozen=True)
class PhysParams:
    """Translation speed ``tau`` (Reynolds-like) and angular speed ``rho``
    (Taylor-like) of the body.  Both stay fixed for a whole computation."""

    tau: float = 1.0
    rho: float = 1.0

    def __post_init__(self):
        tau, rho = float(self.tau), float(self.rho)
        if not (math.isfinite(tau) and tau > 0.0):
            raise DomainError(f"tau must be a positive finite number, got {self.tau!r}")
        if not (math.isfinite(rho) and rho != 0.0):
            raise DomainError(f"rho must be a nonzero finite number, got {self.rho!r}")
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "rho", rho)

    @property
    def half_period(self) -> float:
        """Half period ``pi/|rho|`` of the body rotation."""
        return math.pi / abs(self.rho)

    @property
    def omega(self) -> np.ndarray:
        return self.rho * E1


class MultiIndex(NamedTuple):
    a1: int = 0
    a2: int = 0
    a3: int = 0

    @property
    def order(self) -> int:
        return self.a1 + self.a2 + self.a3

    @classmethod
    def of(cls, alpha) -> "MultiIndex":
        if alpha is None:
            return cls()
        if isinstance(alpha, cls):
            mi = alpha
        else:
            mi = cls(*(int(a) for a in alpha))
        if min(mi) < 0:
            raise DomainError(f"multi-index entries must be nonnegative, got {tuple(mi)}")
        return mi

    @classmethod
    def unit(cls, l: int) -> "MultiIndex":
        a = [0, 0, 0]
        a[l] = 1
        return cls(*a)

    def axes(self) -> list[int]:
        """Derivative axes in nondecreasing order, e.g. (1,0,1) -> [0, 2]."""
        return [0] * self.a1 + [1] * self.a2 + [2] * self.a3


def as_point(x, name: str = "x") -> np.ndarray:
    """Validate and convert ``x`` to a float array with trailing axis 3."""
    arr = np.asarray(x, dtype=float)
    if arr.shape[-1:] != (3,):
        raise ValueError(f"{name} must have trailing dimension 3, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite coordinates")
    return arr


def norm(x) -> np.ndarray:
    return np.sqrt(np.sum(np.square(x), axis=-1))


def require_nonzero(x, what: str = "kernel", tol: float = 0.0) -> np.ndarray:
    r = norm(x)
    if np.any(r <= tol):
        raise SingularPointError(f"{what} is singular at x = 0")
    return r


def wake_weight(x) -> np.ndarray | float:
    """``s(x) = 1 + |x| - x1``; equals 1 on the downstream x1-axis and grows
    like ``2|x|`` upstream."""
    x = as_point(x)
    s = 1.0 + norm(x) - x[..., 0]
    return float(s) if s.ndim == 0 else s


def rotation_matrix(t, p: PhysParams) -> np.ndarray:
    """``exp(t*Omega)``: rotation by angle ``rho*t`` about the x1-axis.

    Broadcasts over ``t``; the result has shape ``t.shape + (3, 3)``.
    """
    return rotation_from_angle(p.rho * np.asarray(t, dtype=float))


def rotation_from_angle(theta) -> np.ndarray:
    theta = np.asarray(theta)
    c, s = np.cos(theta), np.sin(theta)
    out = np.zeros(theta.shape + (3, 3), dtype=np.result_type(theta, float))
    out[..., 0, 0] = 1.0
    out[..., 1, 1] = c
    out[..., 1, 2] = -s
    out[..., 2, 1] = s
    out[..., 2, 2] = c
    return out


def omega_matrix(p: PhysParams) -> np.ndarray:
    return p.rho * np.array([[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]])


def omega_cross(x, p: PhysParams) -> np.ndarray:
    """``omega x x = rho * (0, -x3, x2)``."""
    x = as_point(x)
    out = np.zeros_like(x)
    out[..., 1] = -p.rho * x[..., 2]
    out[..., 2] = p.rho * x[..., 1]
    return out
