"""Support-recovery metrics, lambda selection and one-step-ahead prediction error."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .exceptions import InputError
from .penalty import PenaltyParams
from .pista import PistaConfig, lambda_zero, pista_solve
from .spline_basis import build_design

__all__ = [
    "SupportMetrics",
    "CurvePoint",
    "precision_recall_f1",
    "f1_curve",
    "best_f1",
    "forward_cv",
    "prediction_mse",
    "one_step_predictions",
    "max_workers",
]


def max_workers(default: int | None = None) -> int:
    """Thread cap from ``TSSPAM_THREADS`` (falls back to the CPU count)."""
    env = os.environ.get("TSSPAM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return default or os.cpu_count() or 1


@dataclass(frozen=True)
class SupportMetrics:
    precision: float
    recall: float
    f1: float
    empty_estimate: bool = False


@dataclass(frozen=True)
class CurvePoint:
    lam: float
    precision: float
    recall: float
    f1: float
    n_selected: int
    empty_estimate: bool = False


def precision_recall_f1(estimated, truth) -> SupportMetrics:
    """Precision, recall and F1 of an estimated index set.

    An empty estimate has precision 1 (no false positives) and is flagged.
    """
    E = set(int(j) for j in estimated)
    T = set(int(j) for j in truth)
    if not T:
        raise InputError("recall is undefined for an empty true set")
    tp = len(E & T)
    empty = not E
    precision = 1.0 if empty else tp / len(E)
    recall = tp / len(T)
    f1 = 0.0 if tp == 0 else 2.0 * precision * recall / (precision + recall)
    return SupportMetrics(precision, recall, f1, empty)


def f1_curve(path, truth) -> list[CurvePoint]:
    out = []
    for e in path:
        m = precision_recall_f1(e.support, truth)
        out.append(CurvePoint(e.lam, m.precision, m.recall, m.f1, len(e.support), m.empty_estimate))
    return out


def best_f1(curve) -> CurvePoint:
    """Curve point with the highest F1; ties go to the larger lambda."""
    if not curve:
        raise InputError("empty curve")
    return max(curve, key=lambda c: (c.f1, c.lam))


def one_step_predictions(design, beta, series) -> np.ndarray:
    """Predict ``X_i[t+1]`` from ``X[t]`` for every consecutive pair in ``series``."""
    X = np.asarray(series, dtype=float)
    Znew = design.transform(X[:-1])
    return design.response_mean + Znew @ np.asarray(getattr(beta, "beta", beta), dtype=float)


def prediction_mse(fit, holdout_series) -> float:
    """Mean squared one-step-ahead error of ``fit`` over ``holdout_series``."""
    X = np.asarray(holdout_series, dtype=float)
    if X.shape[0] < 2:
        raise InputError("holdout needs at least two rows")
    pred = one_step_predictions(fit.design, fit.beta_hat, X)
    err = X[1:, fit.target] - pred
    return float(np.mean(err * err))


def _fold_bounds(n: int, folds: int) -> list[tuple[int, int]]:
    """(train_end, valid_end) row indices of an expanding-window split."""
    if folds < 1:
        raise InputError("folds must be >= 1")
    edges = np.linspace(0, n, folds + 2).round().astype(int)
    return [(int(edges[k + 1]), int(edges[k + 2])) for k in range(folds)]


def forward_cv(
    series,
    target: int,
    folds: int = 3,
    pista_config: PistaConfig | None = None,
    params: PenaltyParams | None = None,
    q: int | None = None,
    order: int = 3,
    smoothness: float = 2.0,
    drop_redundant: bool = True,
    standardize: bool = False,
):
    """Forward-chaining cross-validation over a common lambda grid.

    The rows are cut into ``folds + 1`` consecutive chunks. Fold ``k`` fits on
    chunks ``0..k`` and scores one-step-ahead squared error on chunk ``k+1``;
    the first prediction of a validation chunk uses the last training row as
    its input but never as a target. Unless ``pista_config`` fixes a
    ``lambda_sequence``, the grid is derived from the first training window
    only, so later data cannot influence earlier folds.

    Returns
    -------
    best_lambda : float
        Minimizer of the fold-averaged error; ties go to the larger lambda.
    curve : list of (lambda, mean_mse)
    """
    X = np.asarray(series, dtype=float)
    n = X.shape[0]
    cfg = pista_config or PistaConfig()
    params = params or PenaltyParams(0.0)
    bounds = _fold_bounds(n, folds)
    design_kw = dict(q=q, order=order, smoothness=smoothness, drop_redundant=drop_redundant,
                     standardize=standardize)
    if cfg.lambda_sequence is None:
        d0, y0 = build_design(X[:bounds[0][0]], target, **design_kw)
        lam0 = lambda_zero(d0, y0)
        grid = [lam0]
        for _ in range(cfg.n_lambda - 1):
            nxt = grid[-1] * cfg.decay
            if cfg.lambda_min is not None and nxt < cfg.lambda_min:
                break
            grid.append(nxt)
        cfg = PistaConfig(
            lambda_sequence=tuple(grid), epsilon=cfg.epsilon, eta0=cfg.eta0,
            max_inner_iters=cfg.max_inner_iters,
        )
    grid = np.array(cfg.lambda_sequence)

    def run_fold(b):
        train_end, valid_end = b
        d, y = build_design(X[:train_end], target, **design_kw)
        path = pista_solve(d, y, cfg, params)
        holdout = X[train_end - 1:valid_end]
        truth = holdout[1:, target]
        return np.array([
            np.mean((truth - one_step_predictions(d, e.beta, holdout)) ** 2) for e in path
        ])

    with ThreadPoolExecutor(max_workers=min(max_workers(), len(bounds))) as ex:
        scores = list(ex.map(run_fold, bounds))
    mean = np.mean(np.vstack(scores), axis=0)
    k = int(np.argmin(mean))  # grid is decreasing, so the first minimum is the largest lambda
    curve = list(zip(grid.tolist(), mean.tolist()))
    return float(grid[k]), curve
