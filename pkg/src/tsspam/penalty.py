"""Group MCP and group lasso penalties.

The group MCP applied to a coefficient group with norm ``z`` is::

    r(z) = lam * (z - z**2 / (2 * lam * gamma))   if z < lam * gamma
         = lam**2 * gamma / 2                      otherwise

and splits as ``r(z) = lam * z + w(z)`` where ``w`` is concave and smooth.
The solver treats ``lam * z`` through the proximal step and folds ``w`` into
the smooth part of the objective.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .exceptions import InputError

__all__ = [
    "PenaltyKind",
    "PenaltyParams",
    "penalty_value",
    "concave_value",
    "concave_derivative",
    "concave_grad",
]


class PenaltyKind(str, Enum):
    MCP = "mcp"
    GROUP_LASSO = "glasso"


@dataclass(frozen=True)
class PenaltyParams:
    lam: float
    gamma: float = 1.0
    kind: PenaltyKind = PenaltyKind.MCP

    def __post_init__(self):
        object.__setattr__(self, "kind", PenaltyKind(self.kind))
        if not self.lam >= 0:
            raise InputError(f"lambda must be nonnegative, got {self.lam}")
        if not self.gamma > 0:
            raise InputError(f"gamma must be positive, got {self.gamma}")

    def with_lambda(self, lam: float) -> "PenaltyParams":
        return PenaltyParams(lam, self.gamma, self.kind)


def _check_norm(z):
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise InputError("group norm must be nonnegative")
    return z


def penalty_value(params: PenaltyParams, group_norm):
    """Penalty ``r(z)`` for one or many group norms."""
    z = _check_norm(group_norm)
    lam, gamma = params.lam, params.gamma
    if params.kind is PenaltyKind.GROUP_LASSO:
        out = lam * z
    else:
        out = np.where(z < lam * gamma, lam * z - z * z / (2.0 * gamma), 0.5 * lam * lam * gamma)
    return float(out) if out.ndim == 0 else out


def concave_value(params: PenaltyParams, group_norm):
    """Concave remainder ``w(z) = r(z) - lam * z`` (zero for group lasso)."""
    z = _check_norm(group_norm)
    lam, gamma = params.lam, params.gamma
    if params.kind is PenaltyKind.GROUP_LASSO:
        out = np.zeros_like(z)
    else:
        out = np.where(z < lam * gamma, -z * z / (2.0 * gamma), 0.5 * (lam * lam * gamma - 2.0 * lam * z))
    return float(out) if out.ndim == 0 else out


def concave_derivative(params: PenaltyParams, group_norm):
    """Scalar derivative ``w'(z)``: ``-z/gamma`` below ``lam*gamma``, ``-lam`` above."""
    z = _check_norm(group_norm)
    if params.kind is PenaltyKind.GROUP_LASSO:
        out = np.zeros_like(z)
    else:
        out = np.where(z < params.lam * params.gamma, -z / params.gamma, -params.lam)
    return float(out) if out.ndim == 0 else out


def concave_grad(params: PenaltyParams, beta_group) -> np.ndarray:
    """Gradient of ``w(||beta_j||)`` with respect to the group vector ``beta_j``."""
    beta_group = np.asarray(beta_group, dtype=float)
    if params.kind is PenaltyKind.GROUP_LASSO:
        return np.zeros_like(beta_group)
    z = float(np.linalg.norm(beta_group))
    if z == 0.0:
        return np.zeros_like(beta_group)
    if z < params.lam * params.gamma:
        return -beta_group / params.gamma
    return -params.lam * beta_group / z
