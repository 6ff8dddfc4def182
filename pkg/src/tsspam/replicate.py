"""Synthetic support-recovery experiment over many seeds.

Each seed draws a series from :mod:`tsspam.synth`, fits target 0 along a
lambda grid shared by all seeds, and records precision, recall and F1 for
every grid point. The output is tidy: one row per (seed, penalty, lambda).
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .evaluation import f1_curve, max_workers
from .penalty import PenaltyKind, PenaltyParams
from .pista import PistaConfig, pista_solve
from .spline_basis import build_design
from .synth import SynthConfig, generate

__all__ = ["ReplicationConfig", "default_grid", "run_seed", "run_replication", "summarize"]


def default_grid(start: float = 1.0, stop: float = 0.01, decay: float = 0.95) -> tuple:
    """Geometric grid ``start * decay**k`` down to ``stop``."""
    k = int(np.floor(np.log(stop / start) / np.log(decay)))
    return tuple(float(start * decay ** i) for i in range(k + 1))


@dataclass(frozen=True)
class ReplicationConfig:
    p: int = 300
    n: int = 500
    n_active: int = 10
    q: int = 3
    order: int = 3
    gamma: float = 1.0
    standardize: bool = True
    drop_redundant: bool = True
    penalties: tuple = ("mcp", "glasso")
    grid: tuple = field(default_factory=default_grid)
    epsilon: float = 1e-4
    eta0: float | str = "auto"
    max_inner_iters: int = 10000
    synth: dict = field(default_factory=dict)


def run_seed(seed: int, cfg: ReplicationConfig) -> list[dict]:
    X, truth = generate(SynthConfig(p=cfg.p, n=cfg.n, n_active=cfg.n_active, seed=seed, **cfg.synth))
    design, y = build_design(
        X, truth.target, q=cfg.q, order=cfg.order,
        drop_redundant=cfg.drop_redundant, standardize=cfg.standardize,
    )
    pcfg = PistaConfig(
        lambda_sequence=cfg.grid, epsilon=cfg.epsilon, eta0=cfg.eta0,
        max_inner_iters=cfg.max_inner_iters,
    )
    rows = []
    for kind in cfg.penalties:
        path = pista_solve(design, y, pcfg, PenaltyParams(0.0, cfg.gamma, PenaltyKind(kind)))
        for entry, point in zip(path, f1_curve(path, truth.active_set)):
            rows.append({
                "seed": seed,
                "penalty": PenaltyKind(kind).value,
                "lambda": entry.lam,
                "precision": point.precision,
                "recall": point.recall,
                "f1": point.f1,
                "n_selected": point.n_selected,
                "empty_estimate": point.empty_estimate,
                "inner_iters": entry.inner_iters,
                "final_kkt": entry.final_kkt,
                "converged": entry.converged,
                "descent_violations": entry.descent_violations,
            })
    return rows


def _run_seed_star(args):
    return run_seed(*args)


def run_replication(seeds, cfg: ReplicationConfig | None = None, workers: int | None = None) -> list[dict]:
    """Run :func:`run_seed` for every seed, in parallel processes when allowed."""
    cfg = cfg or ReplicationConfig()
    seeds = list(seeds)
    workers = workers or max_workers()
    if workers <= 1 or len(seeds) <= 1:
        out = [run_seed(s, cfg) for s in seeds]
    else:
        env = os.environ.get("OMP_NUM_THREADS")
        os.environ.setdefault("OMP_NUM_THREADS", "1")
        try:
            with ProcessPoolExecutor(max_workers=workers) as ex:
                out = list(ex.map(_run_seed_star, [(s, cfg) for s in seeds]))
        finally:
            if env is None:
                os.environ.pop("OMP_NUM_THREADS", None)
    return [row for rows in out for row in rows]


def summarize(rows, penalty: str) -> dict:
    """Per-seed best F1 and the median curves across seeds for one penalty."""
    rows = [r for r in rows if r["penalty"] == penalty]
    seeds = sorted({r["seed"] for r in rows})
    lams = sorted({r["lambda"] for r in rows}, reverse=True)
    index = {lam: k for k, lam in enumerate(lams)}
    shape = (len(seeds), len(lams))
    P = np.full(shape, np.nan)
    R = np.full(shape, np.nan)
    F = np.full(shape, np.nan)
    srow = {s: k for k, s in enumerate(seeds)}
    for r in rows:
        i, k = srow[r["seed"]], index[r["lambda"]]
        P[i, k], R[i, k], F[i, k] = r["precision"], r["recall"], r["f1"]
    best = []
    for i in range(len(seeds)):
        # ties go to the larger lambda, which comes first in the decreasing grid
        k = int(np.nanargmax(F[i]))
        best.append((lams[k], F[i, k]))
    best = np.array(best)
    return {
        "seeds": seeds,
        "lambdas": np.array(lams),
        "best_lambda": best[:, 0],
        "best_f1": best[:, 1],
        "median_precision": np.nanmedian(P, axis=0),
        "median_recall": np.nanmedian(R, axis=0),
        "median_f1": np.nanmedian(F, axis=0),
        "total_descent_violations": int(sum(r["descent_violations"] for r in rows)),
    }


def config_dict(cfg: ReplicationConfig) -> dict:
    return asdict(cfg)
