"""Matrix-exponential score oracles.

Both oracles score samples against the trace-one density

    U = exp(alpha * sum_j M(w_j)) / tr exp(alpha * sum_j M(w_j)).

The exact oracle densifies the exponent and diagonalizes it. The sketched
oracle never forms a d x d matrix: it pushes a Gaussian sketch through a
truncated Taylor series of ``exp(alpha/2 * sum_j M(w_j))`` using only
matrix-vector products with the data.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .errors import ConfigError, DimensionMismatch, TooLarge, ZeroMass
from .moments import (
    DataLike,
    WeightLike,
    as_samples,
    as_weights,
    estimate_spectral_norm,
    weighted_cov_dense,
)

DENSE_LIMIT = 2048
# below this dimension the exponent is cheaper to form once than to apply implicitly
DENSE_OPERATOR_DIM = 256


@dataclass
class WeightHistory:
    """Weight vectors whose covariances have accumulated in the MMW exponent."""

    weights: list = field(default_factory=list)
    alpha: float = 1.0
    # optional upper bound on ||sum_j M(w_j)||_2; lets the sketched oracle pick
    # its Taylor degree without another power-method pass
    norm_bound: Optional[float] = None
    centers: list = field(default_factory=list, repr=False)
    masses: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        ws, self.weights = self.weights, []
        self.centers, self.masses = [], []
        self._data_id = None
        for w in ws:
            self.weights.append(np.asarray(w, dtype=np.float64).ravel())

    def __len__(self):
        return len(self.weights)

    def append(self, w: WeightLike) -> None:
        self.weights.append(np.asarray(w, dtype=np.float64).ravel())
        self.centers = []

    def _cache(self, x: np.ndarray) -> None:
        if len(self.centers) == len(self.weights) and self._data_id == id(x):
            return
        self.centers, self.masses = [], []
        for w in self.weights:
            w = as_weights(w, x.shape[0])
            mass = float(w.sum())
            if not mass > 0:
                raise ZeroMass("history entry with zero mass")
            self.masses.append(mass)
            self.centers.append((w @ x) / mass)
        self._data_id = id(x)

    def coefficients(self, n: int) -> np.ndarray:
        if not self.weights:
            return np.zeros(n)
        return np.sum(self.weights, axis=0)


class CovarianceSum:
    """Implicit operator ``v -> sum_j M(w_j) v``.

    Uses ``M(w) = sum_i w_i X_i X_i^T - |w| mu(w) mu(w)^T`` so one product
    costs O(nd + td) however long the history is. Data are shifted by their
    plain mean first; M(w) is translation invariant and the shift keeps the
    two terms from cancelling catastrophically.
    """

    def __init__(self, data: DataLike, history: WeightHistory):
        x = as_samples(data)
        history._cache(x)
        self.shift = x.mean(axis=0)
        self.x = x - self.shift
        self.coef = history.coefficients(x.shape[0])
        if history.weights:
            self.mu = np.array(history.centers) - self.shift
            self.mass = np.array(history.masses)
        else:
            self.mu = np.zeros((0, x.shape[1]))
            self.mass = np.zeros(0)
        self.d = x.shape[1]

    def __call__(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        if v.shape[0] != self.d:
            raise DimensionMismatch(f"vector has leading dimension {v.shape[0]}, expected {self.d}")
        xv = self.x @ v
        cxv = self.coef * xv if xv.ndim == 1 else self.coef[:, None] * xv
        out = self.x.T @ cxv
        if self.mass.size:
            out -= self.mu.T @ (self.mass[:, None] * (self.mu @ v) if v.ndim == 2 else self.mass * (self.mu @ v))
        return out

    def dense(self) -> np.ndarray:
        m = (self.x.T * self.coef) @ self.x - (self.mu.T * self.mass) @ self.mu
        return 0.5 * (m + m.T)


def taylor_exp_matvec(history: WeightHistory, data: DataLike, ell: int, v, op: CovarianceSum | None = None) -> np.ndarray:
    """Apply ``P_ell(alpha/2 * sum_j M(w_j))`` to ``v`` by Horner's rule.

    ``P_ell(Y) = sum_{j<=ell} Y^j / j!``. ``v`` may be a vector or a block of
    column vectors.
    """
    if ell < 0:
        raise ConfigError("ell must be nonnegative")
    v = np.asarray(v, dtype=np.float64)
    if not history.weights or history.alpha == 0 or ell == 0:
        return v.copy()
    op = CovarianceSum(data, history) if op is None else op
    half = 0.5 * history.alpha
    out = v.copy()
    for j in range(ell, 0, -1):
        out = v + (half / j) * op(out)
    return out


def default_r(n: int, d: int, delta: float) -> int:
    return int(min(d, math.ceil(20 * math.log((n + 1) / delta))))


def default_ell(d: int) -> int:
    return max(10, math.ceil(2 * math.log(d + 1)))


def taylor_degree(y: float, ell: int) -> int:
    """Smallest degree >= ell whose Taylor tail at ``y`` is below ``e^-ell``.

    On the eigenvalue ``y`` the relative error of ``P_k(y)`` against ``e^y`` is
    exactly ``P(Poisson(y) > k)``; for ``y`` of order one this returns ``ell``.
    """
    if y <= 0:
        return ell
    target = math.exp(-ell)
    k = ell
    while stats.poisson.sf(k, y) > target:
        k += 1
    return k


@dataclass(frozen=True)
class SketchParams:
    r: Optional[int] = None
    ell: Optional[int] = None
    delta: float = 0.1
    adaptive_degree: bool = True

    def resolve(self, n: int, d: int) -> tuple:
        r = default_r(n, d, self.delta) if self.r is None else self.r
        ell = default_ell(d) if self.ell is None else self.ell
        if r < 1 or ell < 0:
            raise ConfigError(f"sketch width must be >= 1 and degree >= 0, got r={r}, ell={ell}")
        return int(r), int(ell)


@dataclass(frozen=True)
class SketchedExponentialOracle:
    sketch: np.ndarray
    trace_estimate: float
    r: int
    ell: int
    seed: Optional[int] = None
    exact_sketch: bool = False


@dataclass
class ScoreReport:
    tau: np.ndarray
    q: Optional[float] = None
    oracle_kind: str = "exact"

    def to_json(self) -> str:
        return json.dumps({
            "tau": [float(t) for t in self.tau],
            "q": None if self.q is None else float(self.q),
            "oracle": self.oracle_kind,
        })

    @classmethod
    def from_json(cls, text: str) -> "ScoreReport":
        obj = json.loads(text)
        return cls(tau=np.asarray(obj["tau"], dtype=float), q=obj["q"], oracle_kind=obj["oracle"])


def build_sketched_oracle(
    data: DataLike,
    history: WeightHistory,
    w_now: WeightLike | None = None,
    params: SketchParams | None = None,
    rng: np.random.Generator | int | None = None,
) -> SketchedExponentialOracle:
    """Form ``A = S P_ell(alpha/2 * sum_j M(w_j))`` and ``tr(A A^T)``.

    ``S`` has i.i.d. N(0, 1/r) entries. When ``r >= d`` no dimension reduction
    is possible, so the identity is used in place of a random ``S``: it is the
    exact isometry and costs the same.
    """
    x = as_samples(data)
    n, d = x.shape
    params = SketchParams() if params is None else params
    r, ell = params.resolve(n, d)
    seed = rng if isinstance(rng, (int, np.integer)) else None
    gen = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng

    op = None
    if history.weights and history.alpha != 0 and ell > 0:
        op = CovarianceSum(x, history)
        if d <= DENSE_OPERATOR_DIM:
            m = op.dense()
            op = lambda v: m @ v
        if params.adaptive_degree:
            bound = history.norm_bound
            if bound is None:
                est = estimate_spectral_norm(op, d, accuracy=0.1, fail_prob=1e-3, rng=gen)
                bound = est.value / 0.9
            ell = taylor_degree(0.5 * history.alpha * bound, ell)

    exact = r >= d
    if exact:
        s = np.eye(d)
        r = d
    else:
        s = gen.standard_normal((r, d)) / math.sqrt(r)
    if op is None:
        a = s.copy()
    else:
        # P is symmetric, so the rows of S P are P applied to the rows of S
        a = taylor_exp_matvec(history, x, ell, s.T, op=op).T
    trace = float(np.sum(a * a))
    return SketchedExponentialOracle(sketch=a, trace_estimate=trace, r=r, ell=ell, seed=seed, exact_sketch=exact)


def sketched_scores(oracle: SketchedExponentialOracle, data: DataLike, w_now: WeightLike, unweighted_q: bool = False) -> ScoreReport:
    """``tau_i = ||A (X_i - mu(w_now))||^2 / tr(A A^T)`` plus the augmented score.

    ``q = sum_i w_i tau_i - 1`` estimates ``<M(w_now) - I, U>``. The
    ``unweighted_q`` switch instead returns ``sum_i (tau_i - 1)``.
    """
    x = as_samples(data)
    w = as_weights(w_now, x.shape[0])
    a = oracle.sketch
    if a.shape[1] != x.shape[1]:
        raise DimensionMismatch(f"oracle built for d={a.shape[1]}, data has d={x.shape[1]}")
    mass = float(w.sum())
    if not mass > 0:
        raise ZeroMass("w_now has zero mass")
    mu = (w @ x) / mass
    proj = x @ a.T - mu @ a.T
    tau = np.einsum("ij,ij->i", proj, proj) / oracle.trace_estimate
    q = float(np.sum(tau - 1.0)) if unweighted_q else float(w @ tau - 1.0)
    return ScoreReport(tau=tau, q=q, oracle_kind="sketched")


def exact_density(data: DataLike, history: WeightHistory) -> np.ndarray:
    """Dense ``U`` for the given history (trace one, PSD)."""
    x = as_samples(data)
    d = x.shape[1]
    if d > DENSE_LIMIT:
        raise TooLarge(f"d={d} exceeds the dense limit {DENSE_LIMIT}")
    if not history.weights or history.alpha == 0:
        return np.eye(d) / d
    evals, evecs = np.linalg.eigh(history.alpha * CovarianceSum(x, history).dense())
    e = np.exp(evals - evals.max())
    e /= e.sum()
    return (evecs * e) @ evecs.T


def _density_factors(x: np.ndarray, history: WeightHistory):
    d = x.shape[1]
    if not history.weights or history.alpha == 0:
        return np.eye(d), np.full(d, 1.0 / d)
    evals, evecs = np.linalg.eigh(history.alpha * CovarianceSum(x, history).dense())
    e = np.exp(evals - evals.max())
    return evecs, e / e.sum()


def exact_scores(data: DataLike, history: WeightHistory, w_now: WeightLike) -> ScoreReport:
    """Scores against the exactly diagonalized density; ``q = <M(w_now) - I, U>``."""
    x = as_samples(data)
    d = x.shape[1]
    if d > DENSE_LIMIT:
        raise TooLarge(f"d={d} exceeds the dense limit {DENSE_LIMIT}")
    w = as_weights(w_now, x.shape[0])
    mass = float(w.sum())
    if not mass > 0:
        raise ZeroMass("w_now has zero mass")
    evecs, evals = _density_factors(x, history)
    mu = (w @ x) / mass
    proj = (x - mu) @ evecs
    tau = (proj * proj) @ evals
    u = (evecs * evals) @ evecs.T
    q = float(np.sum((weighted_cov_dense(x, w) - np.eye(d)) * u))
    return ScoreReport(tau=np.maximum(tau, 0.0), q=q, oracle_kind="exact")


def score_oracle(kind: str, data: DataLike, history: WeightHistory, w_now: WeightLike,
                 params: SketchParams | None = None, rng=None) -> ScoreReport:
    if kind == "exact":
        return exact_scores(data, history, w_now)
    if kind == "sketched":
        oracle = build_sketched_oracle(data, history, w_now, params, rng)
        return sketched_scores(oracle, data, w_now)
    raise ConfigError(f"unknown oracle {kind!r}")
