"""End-to-end fitting of sparse additive lag-1 models and causal graph assembly."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .evaluation import best_f1, f1_curve, forward_cv, max_workers
from .exceptions import InputError
from .objective import Coefficients
from .penalty import PenaltyKind, PenaltyParams
from .pista import PistaConfig, SolutionPath, pista_solve
from .spline_basis import GroupedDesign, build_design

__all__ = [
    "FitConfig",
    "TsSpamFit",
    "Edge",
    "CausalGraph",
    "OracleSolution",
    "fit_target",
    "fit_all",
    "oracle_fit",
    "oracle_solution",
    "reconstruct_function",
    "function_l2",
    "top_k_parents",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FitConfig:
    """Everything needed to turn a series into a fitted target.

    ``select`` is one of ``"f1"`` (needs ground truth), ``"cv"`` (forward
    chaining) or ``"fixed"`` (uses ``fixed_lambda``, else the last path
    entry). ``None`` means ``"f1"`` when truth is supplied and ``"cv"``
    otherwise.
    """

    q: int | None = None
    order: int = 3
    smoothness: float = 2.0
    drop_redundant: bool = True
    standardize: bool = False
    gamma: float = 1.0
    penalty: PenaltyKind = PenaltyKind.MCP
    pista: PistaConfig = field(default_factory=PistaConfig)
    select: str | None = None
    fixed_lambda: float | None = None
    cv_folds: int = 3

    def __post_init__(self):
        object.__setattr__(self, "penalty", PenaltyKind(self.penalty))
        if self.select not in (None, "f1", "cv", "fixed"):
            raise InputError(f"unknown selection rule {self.select!r}")

    @property
    def params(self) -> PenaltyParams:
        return PenaltyParams(0.0, self.gamma, self.penalty)

    def design_kwargs(self) -> dict:
        return dict(
            q=self.q, order=self.order, smoothness=self.smoothness,
            drop_redundant=self.drop_redundant, standardize=self.standardize,
        )


@dataclass(frozen=True)
class TsSpamFit:
    """A fitted target: the full path plus the selected coefficients.

    ``design`` keeps the bases (and column scales) needed to evaluate the
    fitted component functions at new points; its ``Z`` may be empty for
    fits restored from disk.
    """

    target: int
    path: SolutionPath
    selected_lambda: float
    beta_hat: Coefficients
    design: GroupedDesign
    selection: str = "fixed"

    @property
    def support(self) -> tuple[int, ...]:
        return self.beta_hat.support

    @property
    def response_mean(self) -> float:
        return self.design.response_mean

    @property
    def bases(self):
        return self.design.bases

    def group_norms(self) -> np.ndarray:
        return self.beta_hat.norms()


@dataclass(frozen=True)
class Edge:
    source: int
    target: int
    weight: float


@dataclass(frozen=True)
class CausalGraph:
    p: int
    edges: tuple
    labels: tuple | None = None

    def __post_init__(self):
        for e in self.edges:
            if not (0 <= e.source < self.p and 0 <= e.target < self.p):
                raise InputError(f"edge {e} has an index outside [0, {self.p})")
            if not e.weight > 0:
                raise InputError(f"edge {e} has a nonpositive weight")

    def parents(self, i: int) -> list[Edge]:
        return [e for e in self.edges if e.target == i]

    def label(self, j: int) -> str:
        return self.labels[j] if self.labels else str(j)

    @classmethod
    def from_fits(cls, fits, p: int, labels=None) -> "CausalGraph":
        edges = []
        for fit in fits:
            norms = fit.group_norms()
            for j in np.flatnonzero(norms > 0):
                edges.append(Edge(int(j), fit.target, float(norms[j])))
        return cls(p, tuple(edges), tuple(labels) if labels is not None else None)


@dataclass(frozen=True)
class OracleSolution:
    support: tuple
    beta: Coefficients
    rank_deficient: bool = False


def _select(path: SolutionPath, rule: str, config: FitConfig, truth):
    if not len(path):
        raise InputError("empty solution path; the lambda grid never went below lambda_0")
    if rule == "fixed":
        if config.fixed_lambda is None:
            return path[-1].lam
        return path.entry_at(config.fixed_lambda).lam
    if truth is None:
        raise InputError("F1 selection needs the true parent set")
    return best_f1(f1_curve(path, truth)).lam


def fit_target(series, target: int, config: FitConfig | None = None, truth=None) -> TsSpamFit:
    """Fit the additive model for one target and pick a lambda on its path.

    All ``p`` series, including the target itself, are candidate parents.
    With cross-validated selection the full-data path is solved on the CV
    grid, whose first value is the first training window's ``lambda_0``; grid
    values at or above the full-data ``lambda_0`` carry the empty model, so
    CV can select it.
    """
    config = config or FitConfig()
    X = np.asarray(series, dtype=float)
    design, y = build_design(X, target, **config.design_kwargs())
    rule = config.select or ("f1" if truth is not None else "cv")
    if rule == "cv":
        lam, curve = forward_cv(
            X, target, folds=config.cv_folds, pista_config=config.pista,
            params=config.params, **config.design_kwargs(),
        )
        pista_cfg = replace(config.pista, lambda_sequence=tuple(c[0] for c in curve))
        path = pista_solve(design, y, pista_cfg, config.params)
    else:
        path = pista_solve(design, y, config.pista, config.params)
        lam = _select(path, rule, config, truth)
    entry = path.entry_at(lam)
    if not entry.converged:
        logger.warning("target %d: stage lambda=%.4g hit max_inner_iters", target, lam)
    return TsSpamFit(target, path, entry.lam, entry.beta, design, rule)


def fit_all(series, config: FitConfig | None = None, labels=None, targets=None):
    """Fit every target independently and assemble the causal graph.

    Returns
    -------
    graph : CausalGraph
    fits : list of TsSpamFit
    """
    X = np.asarray(series, dtype=float)
    p = X.shape[1]
    targets = range(p) if targets is None else targets
    with ThreadPoolExecutor(max_workers=max_workers()) as ex:
        fits = list(ex.map(lambda i: fit_target(X, i, config), targets))
    return CausalGraph.from_fits(fits, p, labels), fits


def oracle_solution(design: GroupedDesign, y, support) -> OracleSolution:
    """Least squares restricted to ``support``; zero elsewhere.

    Uses an SVD-based solver, so a rank-deficient restricted design yields the
    minimum-norm solution and is flagged.
    """
    support = tuple(sorted(set(int(j) for j in support)))
    beta = np.zeros(design.p * design.q)
    if not support:
        return OracleSolution(support, Coefficients(beta, design.p, design.q))
    if len(support) * design.q > design.n:
        raise InputError("restricted design has more columns than rows")
    cols = np.concatenate([np.arange(j * design.q, (j + 1) * design.q) for j in support])
    ZA = design.Z[:, cols]
    sol, _, rank, _ = np.linalg.lstsq(ZA, np.asarray(y, dtype=float), rcond=None)
    beta[cols] = sol
    return OracleSolution(support, Coefficients(beta, design.p, design.q), rank < cols.size)


def oracle_fit(series, target: int, true_support, q: int | None = None, order: int = 3, **design_kw) -> OracleSolution:
    design, y = build_design(series, target, q=q, order=order, **design_kw)
    return oracle_solution(design, y, true_support)


def reconstruct_function(fit: TsSpamFit, j: int, xs) -> np.ndarray:
    """Fitted component ``f_j`` at ``xs`` (points outside the knot span are clamped)."""
    if not 0 <= j < fit.design.p:
        raise InputError(f"group {j} out of range")
    return fit.design.evaluate_group(j, xs) @ fit.beta_hat.group(j)


def function_l2(fit: TsSpamFit, j: int, reference_f: Callable, grid: int = 1001) -> float:
    """Root mean squared gap between fitted and reference ``f_j``.

    Both functions are evaluated on a uniform grid over the knot interval of
    group ``j``, centered by their trapezoid-rule means, and the squared gap
    is integrated with the trapezoid rule and divided by the interval length.
    """
    basis = fit.design.bases[j]
    if basis is None:
        raise InputError(f"group {j} has a degenerate (constant) input")
    a, b = basis.interval
    xs = np.linspace(a, b, grid)
    width = b - a

    def centered(v):
        return v - np.trapezoid(v, xs) / width

    diff = centered(reconstruct_function(fit, j, xs)) - centered(np.asarray(reference_f(xs), dtype=float))
    return float(np.sqrt(np.trapezoid(diff * diff, xs) / width))


def top_k_parents(graph: CausalGraph, i: int, k: int) -> list[Edge]:
    """The ``k`` heaviest incoming edges of ``i``; ties favor the smaller source."""
    if k < 0:
        raise InputError("k must be nonnegative")
    ranked = sorted(graph.parents(i), key=lambda e: (-e.weight, e.source))
    return ranked[:k]
