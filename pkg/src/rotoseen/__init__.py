"""Fundamental solutions of the Oseen and rotating-Oseen systems, the terms of
the far-field expansion of exterior flow past a translating and rotating
body, and numerical checks of their identities and decay rates."""

from .core import PhysParams, MultiIndex, wake_weight, rotation_matrix, omega_cross
from .errors import (
    RotoseenError,
    SingularPointError,
    CoincidenceError,
    DomainError,
    NonConvergenceError,
    SupportError,
    IncompleteSampleError,
)

__version__ = "0.1.0"

__all__ = [
    "PhysParams", "MultiIndex", "wake_weight", "rotation_matrix", "omega_cross",
    "RotoseenError", "SingularPointError", "CoincidenceError", "DomainError",
    "NonConvergenceError", "SupportError", "IncompleteSampleError",
]
