"""Pathwise iterative shrinkage thresholding (PISTA).

Inner loop: proximal gradient steps on ``F = Ltilde + lam * ||beta||_{1,2}``
where ``Ltilde = L + W`` carries the smooth concave part of the penalty. Each
step takes a gradient step on ``Ltilde`` with inverse step size ``eta``,
applies group soft thresholding, and doubles ``eta`` until the quadratic
surrogate majorizes ``F`` at the new point. The loop stops once the
approximate KKT residual drops to ``epsilon * lam``.

Outer loop: a decreasing sequence ``lam_0 > lam_1 > ...`` (by default
``lam_M = 0.95 * lam_{M-1}`` starting from the smallest ``lam_0`` at which
zero is stationary), each stage warm-started from the previous solution.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InputError, SolverError
from .objective import Coefficients, concave_grad_all, group_norms, kkt_residual_from_grad
from .penalty import PenaltyKind, PenaltyParams, concave_value, penalty_value
from .spline_basis import GroupedDesign

__all__ = [
    "PistaConfig",
    "PathEntry",
    "SolutionPath",
    "InnerResult",
    "lambda_zero",
    "group_soft_threshold",
    "ista_step",
    "ista_solve",
    "pista_solve",
    "theoretical_lambda",
    "block_gram_eigs",
    "lambda_schedule",
]

MAX_DOUBLINGS = 60
DESCENT_TOL = 1e-12


@dataclass(frozen=True)
class PistaConfig:
    """Solver settings.

    Either pass an explicit strictly decreasing ``lambda_sequence`` or let the
    solver build ``lam_0 * decay**M`` for ``M = 1..n_lambda``, truncated at
    ``lambda_min`` and at the theoretical level implied by ``sigma``.
    ``eta0`` may be ``"auto"`` to start from the largest single-group Gram
    eigenvalue instead of a fixed value.
    """

    lambda_sequence: tuple | None = None
    n_lambda: int = 100
    decay: float = 0.95
    lambda_min: float | None = None
    epsilon: float = 1e-4
    eta0: float | str = 1.0
    max_inner_iters: int = 10000
    sigma: float | None = None

    def __post_init__(self):
        if self.lambda_sequence is not None:
            seq = tuple(float(v) for v in self.lambda_sequence)
            if not seq:
                raise InputError("lambda_sequence is empty")
            if any(v <= 0 for v in seq) or any(b >= a for a, b in zip(seq, seq[1:])):
                raise InputError("lambda_sequence must be positive and strictly decreasing")
            object.__setattr__(self, "lambda_sequence", seq)
        if not 0 < self.decay < 1:
            raise InputError(f"decay must be in (0, 1), got {self.decay}")
        if self.n_lambda < 1:
            raise InputError("n_lambda must be >= 1")
        if not self.epsilon > 0:
            raise InputError("epsilon must be positive")
        if self.eta0 != "auto" and not float(self.eta0) > 0:
            raise InputError("eta0 must be positive or 'auto'")
        if self.max_inner_iters < 1:
            raise InputError("max_inner_iters must be >= 1")
        if self.sigma is not None and self.sigma < 0:
            raise InputError("sigma must be nonnegative")


@dataclass(frozen=True)
class PathEntry:
    lam: float
    beta: Coefficients
    inner_iters: int
    final_kkt: float
    objective: float
    converged: bool
    descent_violations: int = 0
    eta: float = 1.0

    @property
    def support(self) -> tuple[int, ...]:
        return self.beta.support


@dataclass
class SolutionPath:
    entries: list = field(default_factory=list)
    lambda0: float = 0.0
    epsilon: float = 1e-4
    rho_minus: float | None = None
    rho_plus: float | None = None

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, k):
        return self.entries[k]

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([e.lam for e in self.entries])

    @property
    def total_inner_iters(self) -> int:
        return sum(e.inner_iters for e in self.entries)

    @property
    def descent_violations(self) -> int:
        return sum(e.descent_violations for e in self.entries)

    @property
    def converged(self) -> bool:
        return all(e.converged for e in self.entries)

    def entry_at(self, lam: float) -> PathEntry:
        """Entry whose lambda is closest to ``lam``."""
        if not self.entries:
            raise LookupError("empty solution path")
        k = int(np.argmin(np.abs(self.lambdas - lam)))
        return self.entries[k]


@dataclass(frozen=True)
class InnerResult:
    beta: np.ndarray
    iters: int
    kkt: float
    eta: float
    converged: bool
    objective: float
    descent_violations: int


def lambda_zero(design: GroupedDesign, y) -> float:
    """Smallest lambda at which ``beta = 0`` is stationary: ``max_j ||Z_j^T y / n||``."""
    y = np.asarray(y, dtype=float).reshape(-1)
    g = design.Z.T @ y / design.n
    lam0 = float(group_norms(g, design.q).max())
    if lam0 == 0.0:
        raise InputError("response is orthogonal to every group (lambda_0 = 0); nothing to fit")
    return lam0


def theoretical_lambda(n: int, p: int, sigma: float) -> float:
    """Regularization level ``8 sigma (sqrt(1/n) + sqrt(log p) / n)``."""
    if n < 1 or p < 1:
        raise InputError("n and p must be positive")
    return 8.0 * sigma * (math.sqrt(1.0 / n) + math.sqrt(math.log(p)) / n)


def group_soft_threshold(v, lam: float, eta: float, q: int | None = None) -> np.ndarray:
    """Minimizer of ``(eta/2)||beta - v||^2 + lam * sum_j ||beta_j||``.

    Each group is scaled by ``max(1 - lam / (eta * ||v_j||), 0)``.
    ``q`` defaults to the full length of ``v`` (a single group).
    """
    if not eta > 0:
        raise InputError("eta must be positive")
    if lam < 0:
        raise InputError("lambda must be nonnegative")
    v = np.asarray(v, dtype=float)
    flat = v.reshape(-1)
    q = flat.size if q is None else q
    V = flat.reshape(-1, q)
    z = np.linalg.norm(V, axis=1)
    scale = np.zeros_like(z)
    nz = z > 0
    scale[nz] = np.maximum(1.0 - lam / (eta * z[nz]), 0.0)
    return (V * scale[:, None]).reshape(v.shape)


def block_gram_eigs(design: GroupedDesign) -> tuple[np.ndarray, np.ndarray]:
    """Smallest and largest eigenvalue of each ``Z_j^T Z_j / n``."""
    n, p, q = design.n, design.p, design.q
    blocks = design.Z.reshape(n, p, q)
    grams = np.einsum("tjk,tjl->jkl", blocks, blocks) / n
    eig = np.linalg.eigvalsh(grams)
    return eig[:, 0], eig[:, -1]


def _w_total(beta, params, q):
    if params.kind is PenaltyKind.GROUP_LASSO:
        return 0.0
    return float(np.sum(concave_value(params, group_norms(beta, q))))


def _objective_from_residual(r, beta, params, q, n):
    return float(r @ r) / (2.0 * n) + float(np.sum(penalty_value(params, group_norms(beta, q))))


class _State:
    """Iterate with cached fitted values and gradients."""

    __slots__ = ("beta", "Zb", "r", "grad_loss", "grad_w", "F")

    def __init__(self, design, y, beta, params):
        self.beta = beta
        self.Zb = design.Z @ beta
        self.r = y - self.Zb
        self.grad_loss = -(design.Z.T @ self.r) / design.n
        self.grad_w = concave_grad_all(beta, params, design.q)
        self.F = _objective_from_residual(self.r, beta, params, design.q, design.n)

    @property
    def grad(self):
        return self.grad_loss + self.grad_w


def _step(design, y, params, state: _State, eta: float):
    """One proximal-gradient step with backtracking; returns (new_state, eta)."""
    Z, n, q = design.Z, design.n, design.q
    lam = params.lam
    beta = state.beta
    g = state.grad
    w_old = _w_total(beta, params, q)
    for _ in range(MAX_DOUBLINGS + 1):
        beta_new = group_soft_threshold(beta - g / eta, lam, eta, q)
        d = beta_new - beta
        dd = float(d @ d)
        if dd == 0.0:
            return state, eta
        Zd = Z @ d
        # F(beta_new) - H(beta_new, beta), using the exact quadratic expansion
        # of L; the concave remainder of W is <= 0 so rounding above 0 is dropped.
        w_gap = _w_total(beta_new, params, q) - w_old - float(state.grad_w @ d)
        gap = float(Zd @ Zd) / (2.0 * n) - 0.5 * eta * dd + min(w_gap, 0.0)
        if gap <= 0.0:
            new = _State.__new__(_State)
            new.beta = beta_new
            new.Zb = state.Zb + Zd
            new.r = y - new.Zb
            new.grad_loss = -(Z.T @ new.r) / n
            new.grad_w = concave_grad_all(beta_new, params, q)
            new.F = _objective_from_residual(new.r, beta_new, params, q, n)
            return new, eta
        eta *= 2.0
    raise SolverError(
        f"line search exceeded {MAX_DOUBLINGS} doublings (eta={eta:.3g}); design is ill-conditioned"
    )


def ista_step(beta, design: GroupedDesign, y, params: PenaltyParams, eta_prev: float):
    """Single backtracking proximal-gradient step from ``beta``.

    Returns
    -------
    beta_next : ndarray
    eta_next : float
        The accepted inverse step size, ``2**z * eta_prev`` for the smallest
        integer ``z >= 0`` at which the surrogate majorizes the objective.
    """
    if not eta_prev > 0:
        raise InputError("eta_prev must be positive")
    y = np.asarray(y, dtype=float).reshape(-1)
    state = _State(design, y, np.asarray(beta, dtype=float).copy(), params)
    new, eta = _step(design, y, params, state, float(eta_prev))
    return new.beta.copy(), eta


def ista_solve(
    design: GroupedDesign,
    y,
    params: PenaltyParams,
    beta_init=None,
    epsilon: float = 1e-4,
    eta: float = 1.0,
    max_iters: int = 10000,
) -> InnerResult:
    """Run ISTA at fixed lambda until ``kkt <= epsilon * lambda`` or ``max_iters``."""
    y = np.asarray(y, dtype=float).reshape(-1)
    q = design.q
    beta = np.zeros(design.Z.shape[1]) if beta_init is None else np.array(
        getattr(beta_init, "beta", beta_init), dtype=float
    ).reshape(-1)
    state = _State(design, y, beta, params)
    tol = epsilon * params.lam
    kkt = kkt_residual_from_grad(state.beta, state.grad, params.lam, q)
    it = 0
    violations = 0
    while kkt > tol and it < max_iters:
        new, eta = _step(design, y, params, state, eta)
        if new.F > state.F + DESCENT_TOL:
            violations += 1
        it += 1
        if new is state:
            # the prox step is a fixed point; no further progress is possible
            break
        state = new
        kkt = kkt_residual_from_grad(state.beta, state.grad, params.lam, q)
    return InnerResult(
        beta=state.beta,
        iters=it,
        kkt=kkt,
        eta=eta,
        converged=kkt <= tol,
        objective=state.F,
        descent_violations=violations,
    )


def lambda_schedule(lam0: float, config: PistaConfig, n: int | None = None, p: int | None = None) -> list[float]:
    """The decreasing lambda grid used by :func:`pista_solve`."""
    if config.lambda_sequence is not None:
        return list(config.lambda_sequence)
    floor = 0.0
    if config.lambda_min is not None:
        floor = max(floor, config.lambda_min)
    if config.sigma is not None and n is not None and p is not None:
        floor = max(floor, theoretical_lambda(n, p, config.sigma))
    lams = []
    lam = lam0
    for _ in range(config.n_lambda):
        lam *= config.decay
        if lam <= floor:
            lams.append(floor)
            break
        lams.append(lam)
    if lams and lams[-1] <= 0:
        lams.pop()
    return lams


def pista_solve(
    design: GroupedDesign,
    y,
    config: PistaConfig | None = None,
    params: PenaltyParams | None = None,
) -> SolutionPath:
    """Solve along the lambda path with warm starts.

    ``params`` supplies the penalty kind and ``gamma``; its lambda is ignored.
    """
    config = config or PistaConfig()
    params = params or PenaltyParams(0.0)
    y = np.asarray(y, dtype=float).reshape(-1)
    lam0 = lambda_zero(design, y)
    rho_min, rho_max = block_gram_eigs(design)
    live = np.setdiff1d(np.arange(design.p), design.degenerate)
    rho_minus = float(rho_min[live].min()) if live.size else 0.0
    rho_plus = float(rho_max.max())
    if params.kind is PenaltyKind.MCP and rho_minus <= 1.0 / params.gamma:
        warnings.warn(
            f"smallest block eigenvalue {rho_minus:.3g} <= 1/gamma = {1.0 / params.gamma:.3g}; "
            "the augmented loss is not strongly convex on single groups",
            RuntimeWarning,
            stacklevel=2,
        )
    eta = rho_plus if config.eta0 == "auto" else float(config.eta0)
    if not eta > 0:
        eta = 1.0
    path = SolutionPath(lambda0=lam0, epsilon=config.epsilon, rho_minus=rho_minus, rho_plus=rho_plus)
    beta = np.zeros(design.Z.shape[1])
    for lam in lambda_schedule(lam0, config, design.n, design.p):
        stage = params.with_lambda(lam)
        res = ista_solve(design, y, stage, beta, config.epsilon, eta, config.max_inner_iters)
        eta = res.eta
        beta = res.beta
        path.entries.append(
            PathEntry(
                lam=lam,
                beta=Coefficients(beta.copy(), design.p, design.q),
                inner_iters=res.iters,
                final_kkt=res.kkt,
                objective=res.objective,
                converged=res.converged,
                descent_violations=res.descent_violations,
                eta=eta,
            )
        )
    return path
