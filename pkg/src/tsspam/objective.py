"""Least-squares loss over a grouped design and its penalized variants.

Conventions: ``L(beta) = ||y - Z beta||^2 / (2n)``, the augmented loss is
``L + sum_j w(||beta_j||)`` and the full objective adds ``lam * sum_j ||beta_j||``.
All functions take a flat coefficient vector of length ``p*q``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import InputError
from .penalty import PenaltyKind, PenaltyParams, concave_value, penalty_value
from .spline_basis import GroupedDesign

__all__ = [
    "Coefficients",
    "group_norms",
    "loss",
    "grad_loss",
    "concave_grad_all",
    "grad_augmented",
    "augmented_loss",
    "objective_value",
    "kkt_residual",
    "kkt_residual_from_grad",
    "restricted_eigs",
]


@dataclass(frozen=True)
class Coefficients:
    """Flat coefficient vector with a per-group view."""

    beta: np.ndarray
    p: int
    q: int

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=float).reshape(-1)
        if beta.size != self.p * self.q:
            raise InputError(f"expected {self.p * self.q} coefficients, got {beta.size}")
        object.__setattr__(self, "beta", beta)

    def group(self, j: int) -> np.ndarray:
        return self.beta[j * self.q:(j + 1) * self.q]

    def norms(self) -> np.ndarray:
        return group_norms(self.beta, self.q)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(int(j) for j in np.flatnonzero(self.norms() > 0))

    @property
    def n_active(self) -> int:
        return len(self.support)


def group_norms(beta: np.ndarray, q: int) -> np.ndarray:
    return np.linalg.norm(np.asarray(beta, dtype=float).reshape(-1, q), axis=1)


def _check(design: GroupedDesign, y, beta):
    y = np.asarray(y, dtype=float).reshape(-1)
    beta = np.asarray(getattr(beta, "beta", beta), dtype=float).reshape(-1)
    if y.size != design.n:
        raise InputError(f"response has length {y.size}, design has {design.n} rows")
    if beta.size != design.Z.shape[1]:
        raise InputError(f"beta has length {beta.size}, design has {design.Z.shape[1]} columns")
    return y, beta


def loss(design: GroupedDesign, y, beta) -> float:
    y, beta = _check(design, y, beta)
    r = y - design.Z @ beta
    return float(r @ r) / (2.0 * design.n)


def grad_loss(design: GroupedDesign, y, beta) -> np.ndarray:
    y, beta = _check(design, y, beta)
    return design.Z.T @ (design.Z @ beta - y) / design.n


def concave_grad_all(beta: np.ndarray, params: PenaltyParams, q: int) -> np.ndarray:
    """Stacked per-group gradients of the concave part ``w``."""
    beta = np.asarray(beta, dtype=float)
    if params.kind is PenaltyKind.GROUP_LASSO:
        return np.zeros_like(beta)
    B = beta.reshape(-1, q)
    z = np.linalg.norm(B, axis=1)
    thresh = params.lam * params.gamma
    scale = np.zeros_like(z)
    inner = (z > 0) & (z < thresh)
    outer = z >= thresh
    scale[inner] = -1.0 / params.gamma
    scale[outer] = -params.lam / z[outer]
    return (B * scale[:, None]).reshape(-1)


def augmented_loss(design: GroupedDesign, y, beta, params: PenaltyParams) -> float:
    y, beta = _check(design, y, beta)
    w = concave_value(params, group_norms(beta, design.q))
    return loss(design, y, beta) + float(np.sum(w))


def grad_augmented(design: GroupedDesign, y, beta, params: PenaltyParams) -> np.ndarray:
    y, beta = _check(design, y, beta)
    return grad_loss(design, y, beta) + concave_grad_all(beta, params, design.q)


def objective_value(design: GroupedDesign, y, beta, params: PenaltyParams) -> float:
    y, beta = _check(design, y, beta)
    r = penalty_value(params, group_norms(beta, design.q))
    return loss(design, y, beta) + float(np.sum(r))


def kkt_residual_from_grad(beta: np.ndarray, grad: np.ndarray, lam: float, q: int) -> float:
    """``min_xi ||grad + lam * xi||_{inf,2}`` over subgradients of the group norm.

    For an active group the subgradient is the unit direction of the group;
    for a zero group it ranges over the unit ball, which absorbs up to ``lam``
    of the gradient norm.
    """
    B = np.asarray(beta, dtype=float).reshape(-1, q)
    G = np.asarray(grad, dtype=float).reshape(-1, q)
    z = np.linalg.norm(B, axis=1)
    active = z > 0
    out = np.empty(B.shape[0])
    if active.any():
        u = B[active] / z[active, None]
        out[active] = np.linalg.norm(G[active] + lam * u, axis=1)
    if (~active).any():
        out[~active] = np.maximum(np.linalg.norm(G[~active], axis=1) - lam, 0.0)
    return float(out.max()) if out.size else 0.0


def kkt_residual(design: GroupedDesign, y, beta, params: PenaltyParams) -> float:
    y, beta = _check(design, y, beta)
    g = grad_augmented(design, y, beta, params)
    return kkt_residual_from_grad(beta, g, params.lam, design.q)


def restricted_eigs(design: GroupedDesign, groups) -> tuple[float, float]:
    """Extreme eigenvalues of ``Z_A^T Z_A / n`` for the group set ``A``."""
    groups = sorted(set(int(j) for j in groups))
    if not groups:
        raise InputError("restricted_eigs needs at least one group")
    if len(groups) * design.q > design.n:
        warnings.warn(
            f"{len(groups) * design.q} columns exceed {design.n} rows; rho_min is 0",
            stacklevel=2,
        )
    cols = np.concatenate([np.arange(j * design.q, (j + 1) * design.q) for j in groups])
    ZA = design.Z[:, cols]
    eig = np.linalg.eigvalsh(ZA.T @ ZA / design.n)
    return max(float(eig[0]), 0.0), float(eig[-1])
