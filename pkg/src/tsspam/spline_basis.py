"""Uniform-knot B-spline bases, sample centering and the grouped design matrix.

Every candidate parent series ``X_j`` is expanded in a clamped B-spline basis
on its own empirical interval, the basis functions are centered against the
regression sample, and the per-series blocks are stacked side by side into
the design ``Z`` of the lag-1 regression ``X_i[t+1] ~ sum_j f_j(X_j[t])``.

Because B-splines form a partition of unity, the centered functions of one
basis always sum to zero, so a centered block built from all of them has rank
one less than its width. ``build_design`` therefore drops the last centered
function by default (``drop_redundant=True``) and builds the block from a
basis with ``q + 1`` functions, which keeps ``q`` coefficients per group and a
full-rank block.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InputError

__all__ = [
    "KnotVector",
    "BSplineBasis",
    "CenteredBasis",
    "GroupedDesign",
    "build_uniform_knots",
    "eval_basis",
    "center_basis",
    "auto_q",
    "build_design",
]

_PAD = 1e-9


@dataclass(frozen=True)
class KnotVector:
    """Clamped knot vector on ``[a, b]`` for splines of order ``order``.

    ``order`` is the spline order ``l`` (polynomial degree ``l - 1``).
    """

    a: float
    b: float
    interior: np.ndarray
    order: int

    def __post_init__(self):
        interior = np.asarray(self.interior, dtype=float).reshape(-1)
        object.__setattr__(self, "interior", interior)
        if not self.a < self.b:
            raise InputError(f"invalid interval: a={self.a} must be < b={self.b}")
        if self.order < 1:
            raise InputError(f"invalid order {self.order}: must be >= 1")
        if interior.size:
            if np.any(np.diff(interior) <= 0):
                raise InputError("interior knots must be strictly increasing")
            if interior[0] <= self.a or interior[-1] >= self.b:
                raise InputError("interior knots must lie strictly inside (a, b)")

    @property
    def n_interior(self) -> int:
        return int(self.interior.size)

    @property
    def full(self) -> np.ndarray:
        """Knot sequence with both boundary knots repeated ``order`` times."""
        l = self.order
        return np.concatenate([np.full(l, self.a), self.interior, np.full(l, self.b)])


@dataclass(frozen=True)
class BSplineBasis:
    """The ``q = K + l`` B-spline functions attached to a knot vector."""

    knots: KnotVector

    @property
    def order(self) -> int:
        return self.knots.order

    @property
    def q(self) -> int:
        return self.knots.n_interior + self.knots.order

    @property
    def interval(self) -> tuple[float, float]:
        return self.knots.a, self.knots.b

    def __call__(self, x) -> np.ndarray:
        return eval_basis(self, x)


def build_uniform_knots(a: float, b: float, K: int, l: int) -> KnotVector:
    """Clamped knot vector with ``K`` evenly spaced interior knots on ``[a, b]``."""
    if not a < b:
        raise InputError(f"invalid interval: a={a} must be < b={b}")
    if l < 1:
        raise InputError(f"invalid order {l}: must be >= 1")
    if K < 0:
        raise InputError(f"number of interior knots must be >= 0, got {K}")
    interior = np.linspace(a, b, K + 2)[1:-1]
    return KnotVector(float(a), float(b), interior, int(l))


def eval_basis(basis: BSplineBasis, x) -> np.ndarray:
    """Evaluate every basis function at ``x``.

    Uses the triangular Cox-de Boor recursion on the (at most ``l``) functions
    that are nonzero on the knot span containing each point. Points outside
    ``[a, b]`` are clamped to the interval.

    Parameters
    ----------
    basis : BSplineBasis
    x : float or array_like
        Evaluation points.

    Returns
    -------
    ndarray
        Shape ``(q,)`` for scalar input, otherwise ``(len(x), q)``.
    """
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float)).reshape(-1)
    if np.isnan(x).any():
        raise InputError("cannot evaluate a B-spline basis at NaN")
    kv = basis.knots
    t = kv.full
    l = kv.order
    q = basis.q
    x = np.clip(x, kv.a, kv.b)

    # span index s satisfies t[s] <= x < t[s+1]; x == b falls in the last span
    span = np.searchsorted(t, x, side="right") - 1
    span = np.clip(span, l - 1, q - 1)

    m = x.size
    N = np.zeros((m, l))
    N[:, 0] = 1.0
    left = np.empty((m, l))
    right = np.empty((m, l))
    for j in range(1, l):
        left[:, j] = x - t[span + 1 - j]
        right[:, j] = t[span + j] - x
        saved = np.zeros(m)
        for r in range(j):
            temp = N[:, r] / (right[:, r + 1] + left[:, j - r])
            N[:, r] = saved + right[:, r + 1] * temp
            saved = left[:, j - r] * temp
        N[:, j] = saved

    out = np.zeros((m, q))
    cols = (span - (l - 1))[:, None] + np.arange(l)[None, :]
    np.put_along_axis(out, cols, N, axis=1)
    return out[0] if scalar else out


@dataclass(frozen=True)
class CenteredBasis:
    """A B-spline basis shifted by its sample means, ``psi_k = phi_k - offsets[k]``.

    When ``drop_last`` is set the last centered function is omitted from
    evaluations, leaving ``base.q - 1`` linearly independent columns.
    """

    base: BSplineBasis
    offsets: np.ndarray
    drop_last: bool = False

    @property
    def n_columns(self) -> int:
        return self.base.q - 1 if self.drop_last else self.base.q

    @property
    def interval(self) -> tuple[float, float]:
        return self.base.interval

    def __call__(self, x) -> np.ndarray:
        vals = eval_basis(self.base, x) - self.offsets
        return vals[..., :-1] if self.drop_last else vals


def center_basis(basis: BSplineBasis, sample, drop_last: bool = False) -> CenteredBasis:
    """Center ``basis`` so each function has zero mean over ``sample``."""
    sample = np.asarray(sample, dtype=float).reshape(-1)
    if sample.size == 0:
        raise InputError("cannot center a basis on an empty sample")
    if not np.isfinite(sample).all():
        raise InputError("centering sample contains non-finite values")
    offsets = eval_basis(basis, sample).mean(axis=0)
    return CenteredBasis(basis, offsets, drop_last)


@dataclass(frozen=True)
class GroupedDesign:
    """Column-blocked design matrix of one lag-1 regression.

    Block ``j`` (columns ``j*q:(j+1)*q``) holds the centered basis of series
    ``j`` evaluated at ``X_j[0..n-2]``. Groups are 0-based.
    """

    Z: np.ndarray
    p: int
    q: int
    bases: tuple
    degenerate: tuple = ()
    response_mean: float = 0.0
    scales: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.Z.shape[0]

    def group_slice(self, j: int) -> slice:
        return slice(j * self.q, (j + 1) * self.q)

    def group_of(self, column: int) -> int:
        if not 0 <= column < self.p * self.q:
            raise IndexError(f"column {column} out of range")
        return column // self.q

    def block(self, j: int) -> np.ndarray:
        return self.Z[:, self.group_slice(j)]

    def evaluate_group(self, j: int, x) -> np.ndarray:
        """Design columns of group ``j`` at new points ``x`` (clamped)."""
        basis = self.bases[j]
        x = np.atleast_1d(np.asarray(x, dtype=float)).reshape(-1)
        if basis is None:
            return np.zeros((x.size, self.q))
        vals = basis(x)
        if self.scales is not None:
            vals = vals / self.scales[self.group_slice(j)]
        return vals

    def transform(self, lagged) -> np.ndarray:
        """Design rows for new lagged observations ``lagged`` of shape (m, p)."""
        X = np.asarray(lagged, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.p:
            raise InputError(f"expected {self.p} columns, got {X.shape[1]}")
        return np.hstack([self.evaluate_group(j, X[:, j]) for j in range(self.p)])


def auto_q(n: int, order: int, smoothness: float = 2.0) -> int:
    """Per-group basis size ``round(n**(1/(2d+1))) + l`` balancing bias and variance."""
    if smoothness <= 0:
        raise InputError("smoothness d must be positive")
    return int(round(n ** (1.0 / (2.0 * smoothness + 1.0)))) + int(order)


def _empirical_interval(col: np.ndarray) -> tuple[float, float] | None:
    lo, hi = float(col.min()), float(col.max())
    rng = hi - lo
    if not rng > 0:
        return None
    return lo - _PAD * rng, hi + _PAD * rng


def build_design(
    series,
    target: int,
    q: int | None = None,
    order: int = 3,
    smoothness: float = 2.0,
    drop_redundant: bool = True,
    standardize: bool = False,
) -> tuple[GroupedDesign, np.ndarray]:
    """Assemble the grouped design and centered response for one target.

    Parameters
    ----------
    series : array_like, shape (n, p)
        Time-ordered observations, one column per series.
    target : int
        0-based index of the response series ``i``.
    q : int, optional
        Coefficients per group. ``None`` uses :func:`auto_q`.
    order : int
        Spline order ``l`` (cubic is 4, quadratic 3).
    smoothness : float
        The smoothness ``d`` used by the automatic ``q`` rule.
    drop_redundant : bool
        If True, each group uses a basis of ``q + 1`` functions with the last
        centered function dropped (full-rank blocks). If False, a basis of
        exactly ``q`` functions is used and every block has rank ``q - 1``.
    standardize : bool
        Divide every column by its standard deviation over the sample.
        The scales are kept on the design and reapplied by ``transform``.

    Returns
    -------
    design : GroupedDesign
    y : ndarray, shape (n - 1,)
        ``X_i[1:] - mean(X_i[1:])``.
    """
    X = np.asarray(series, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise InputError("series must be a 2-D array (n, p)")
    n, p = X.shape
    if not 0 <= target < p:
        raise InputError(f"target {target} out of range for p={p}")
    if not np.isfinite(X).all():
        raise InputError("series contains non-finite values")
    if q is None:
        q = auto_q(n, order, smoothness)
    if q < 1:
        raise InputError(f"q must be >= 1, got {q}")
    n_basis = q + 1 if drop_redundant else q
    K = n_basis - order
    if K < 0:
        raise InputError(
            f"invalid order {order}: a basis of {n_basis} functions needs order <= {n_basis}"
        )
    if n < max(q + 2, 5):
        raise InputError(f"too few samples: n={n} but need at least {max(q + 2, 5)}")

    lagged = X[:-1]
    resp = X[1:, target]
    response_mean = float(resp.mean())
    y = resp - response_mean

    Z = np.zeros((n - 1, p * q))
    bases = []
    degenerate = []
    for j in range(p):
        col = lagged[:, j]
        interval = _empirical_interval(col)
        if interval is None:
            degenerate.append(j)
            bases.append(None)
            continue
        basis = BSplineBasis(build_uniform_knots(interval[0], interval[1], K, order))
        cb = center_basis(basis, col, drop_last=drop_redundant)
        Z[:, j * q:(j + 1) * q] = cb(col)
        bases.append(cb)
    scales = None
    if standardize:
        scales = Z.std(axis=0)
        scales[scales == 0] = 1.0
        Z = Z / scales
    design = GroupedDesign(
        Z=Z, p=p, q=q, bases=tuple(bases), degenerate=tuple(degenerate),
        response_mean=response_mean, scales=scales,
    )
    return design, y
