"""Ground-truthed nonlinear autoregressive series.

Series 0 is the target: ``X_0[t+1] = sum_{j in P} f_j(X_j[t]) + noise`` with
``n_active`` parents drawn uniformly from ``1..p-1``. Every other series
follows its own scalar recursion ``X_i[t+1] = f_ii(X_i[t]) + noise``. All
component functions are cubics ``a x + b x^2 + c x^3`` whose coefficient
vector is drawn from the unit sphere and then rescaled.

The self-recursions are rescaled so that ``sup |f_ii'| <= contraction`` on
``[-R, R]`` with ``R = h / (1 - contraction)`` and ``h`` the noise half-width.
A map with that derivative bound and ``f(0) = 0`` sends ``[-R, R]`` into
itself once bounded noise is added, so every trajectory started inside stays
there and the recursion is geometrically ergodic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import InputError, InstabilityError

__all__ = [
    "SynthConfig",
    "GroundTruth",
    "cubic",
    "cubic_derivative_sup",
    "standardized_cubic",
    "generate",
]

BLOWUP_GUARD = 1e6
MAX_RESEEDS = 10


@dataclass(frozen=True)
class SynthConfig:
    """Generator settings.

    ``target_scaling`` controls the parents of the target series:
    ``"contraction"`` rescales them jointly like the self-recursions (the sum
    of their derivative bounds equals ``contraction``), ``"unit"`` keeps the
    unit-norm coefficient vectors. The target does not feed back into any
    series, so either choice leaves every trajectory bounded.
    """

    p: int
    n: int
    n_active: int = 10
    noise_half_width: float = 0.4
    seed: int = 0
    burn_in: int = 200
    contraction: float = 0.9
    target_scaling: str = "unit"
    parent_scale: float = 1.0
    derivative_radius: float | None = None
    null_model: bool = False

    def __post_init__(self):
        if self.p < 1 or self.n < 2:
            raise InputError("need p >= 1 and n >= 2")
        if not 0 <= self.n_active < self.p:
            raise InputError(f"n_active must be in [0, p), got {self.n_active}")
        if not self.noise_half_width > 0:
            raise InputError("noise_half_width must be positive")
        if not 0 < self.contraction < 1:
            raise InputError("contraction must lie in (0, 1)")
        if self.burn_in < 0:
            raise InputError("burn_in must be nonnegative")
        if self.target_scaling not in ("unit", "contraction"):
            raise InputError("target_scaling must be 'unit' or 'contraction'")

    @property
    def radius(self) -> float:
        """Interval half-width on which derivative bounds are enforced.

        Defaults to the invariant half-width ``h / (1 - contraction)``.
        """
        if self.derivative_radius is not None:
            return float(self.derivative_radius)
        return self.noise_half_width / (1.0 - self.contraction)


@dataclass(frozen=True)
class GroundTruth:
    """Planted structure for target series 0.

    ``parent_coeffs[j]`` and ``self_coeffs[i]`` are the final cubic
    coefficients; ``unit_vectors`` keeps the draws before rescaling.
    """

    target: int
    active_set: tuple
    parent_coeffs: dict
    self_coeffs: dict
    unit_vectors: dict = field(default_factory=dict)
    seed_used: int = 0

    def f(self, j: int):
        """The planted ``f_{0j}`` as a callable (zero outside the active set)."""
        coeffs = self.parent_coeffs.get(int(j), (0.0, 0.0, 0.0))
        return lambda x: cubic(coeffs, x)

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "active_set": list(self.active_set),
            "parent_coeffs": {str(k): list(v) for k, v in self.parent_coeffs.items()},
            "self_coeffs": {str(k): list(v) for k, v in self.self_coeffs.items()},
            "seed_used": self.seed_used,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GroundTruth":
        return cls(
            target=int(d["target"]),
            active_set=tuple(int(j) for j in d["active_set"]),
            parent_coeffs={int(k): tuple(v) for k, v in d["parent_coeffs"].items()},
            self_coeffs={int(k): tuple(v) for k, v in d.get("self_coeffs", {}).items()},
            seed_used=int(d.get("seed_used", 0)),
        )


def cubic(coeffs, x):
    a, b, c = coeffs
    x = np.asarray(x, dtype=float)
    return x * (a + x * (b + x * c))


def cubic_derivative_sup(coeffs, radius: float) -> float:
    """``max |a + 2 b x + 3 c x^2|`` over ``[-radius, radius]``."""
    a, b, c = coeffs
    pts = [-radius, radius]
    if c != 0.0:
        v = -b / (3.0 * c)
        if -radius < v < radius:
            pts.append(v)
    return float(max(abs(a + 2 * b * x + 3 * c * x * x) for x in pts))


def _unit_vector(rng) -> np.ndarray:
    v = rng.standard_normal(3)
    return v / np.linalg.norm(v)


def standardized_cubic(rng, n_parents: int = 1, contraction: float = 0.9, radius: float = 1.0):
    """Draw ``n_parents`` cubics and rescale them jointly to a contraction.

    Each coefficient vector is uniform on the unit sphere; the whole set is
    then multiplied by ``contraction / sum_j sup_{|x|<=radius} |f_j'(x)|`` so
    the summed derivative bound equals ``contraction``.

    Returns
    -------
    scaled : list of tuple
    unit : list of ndarray
    """
    unit = [_unit_vector(rng) for _ in range(n_parents)]
    total = sum(cubic_derivative_sup(u, radius) for u in unit)
    scale = contraction / total if total > 0 else 0.0
    return [tuple(float(c) for c in scale * u) for u in unit], unit


def _simulate(cfg: SynthConfig, rng):
    p, h = cfg.p, cfg.noise_half_width
    target = 0
    if cfg.null_model:
        active = ()
        parent = {}
        selfc = {}
        units = {}
    else:
        active = tuple(sorted(int(j) for j in rng.choice(np.arange(1, p), size=cfg.n_active, replace=False)))
        units = {}
        selfc = {}
        for i in range(1, p):
            (c,), (u,) = standardized_cubic(rng, 1, cfg.contraction, cfg.radius)
            selfc[i] = c
            units[("self", i)] = u
        if active:
            if cfg.target_scaling == "contraction":
                scaled, unit = standardized_cubic(rng, len(active), cfg.contraction, cfg.radius)
            else:
                unit = [_unit_vector(rng) for _ in active]
                scaled = [tuple(float(c) for c in cfg.parent_scale * u) for u in unit]
        else:
            scaled, unit = [], []
        parent = dict(zip(active, scaled))
        for j, u in zip(active, unit):
            units[("parent", j)] = u

    A = np.zeros(p)
    B = np.zeros(p)
    C = np.zeros(p)
    for i, (a, b, c) in selfc.items():
        A[i], B[i], C[i] = a, b, c
    act = np.array(active, dtype=int)
    PA = np.array([parent[j] for j in active]).reshape(-1, 3)

    total = cfg.n + cfg.burn_in
    noise = rng.uniform(-h, h, size=(total, p))
    X = np.empty((total, p))
    X[0] = noise[0]
    for t in range(total - 1):
        x = X[t]
        nxt = x * (A + x * (B + x * C))
        if act.size:
            xa = x[act]
            nxt[target] = float(np.sum(xa * (PA[:, 0] + xa * (PA[:, 1] + xa * PA[:, 2]))))
        else:
            nxt[target] = 0.0
        X[t + 1] = nxt + noise[t + 1]
        if not np.all(np.abs(X[t + 1]) < BLOWUP_GUARD):
            return None
    series = X[cfg.burn_in:]
    truth = GroundTruth(
        target=target,
        active_set=active,
        parent_coeffs=parent,
        self_coeffs=selfc,
        unit_vectors=units,
    )
    return series, truth


def generate(config: SynthConfig):
    """Simulate ``config.n`` observations after burn-in.

    Returns
    -------
    series : ndarray, shape (n, p)
    truth : GroundTruth

    Raises
    ------
    InstabilityError
        If every attempt (the seed plus ``MAX_RESEEDS`` spawned reseeds)
        exceeds the blow-up guard.
    """
    seeds = np.random.SeedSequence(config.seed).spawn(MAX_RESEEDS)
    attempts = [np.random.default_rng(config.seed)] + [np.random.default_rng(s) for s in seeds]
    for k, rng in enumerate(attempts):
        out = _simulate(config, rng)
        if out is not None:
            series, truth = out
            truth = GroundTruth(
                truth.target, truth.active_set, truth.parent_coeffs, truth.self_coeffs,
                truth.unit_vectors, seed_used=k,
            )
            return series, truth
    raise InstabilityError(f"trajectory exceeded {BLOWUP_GUARD:g} after {MAX_RESEEDS} reseeds")
