"""Robust mean estimation by matrix-multiplicative-weights filtering.

Two estimators share one loop structure. Each epoch measures the spectral
norm of the current weighted covariance (``M(w)`` for bounded second moments,
``M(w) - I`` for isotropic sub-Gaussian data), stops if it is already small,
and otherwise runs MMW rounds: score every sample against the density
``U_t ~ exp(alpha * sum of past feedback)`` and downweight by those scores
until the norm has shrunk by a constant factor.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from .downweight import one_d_filter, random_filter
from .errors import ConfigError, NonConvergence, PruneFailed, QueError
from .matexp import SketchParams, WeightHistory, build_sketched_oracle, exact_scores, sketched_scores
from .moments import DataLike, Dataset, as_samples, covariance_operator, estimate_spectral_norm

MODES = ("bounded_cov", "subgaussian")
ORACLES = ("exact", "sketched")


@dataclass
class EstimatorConfig:
    eps: float = 0.1
    delta: float = 0.1
    gamma1: Optional[float] = None
    gamma2: Optional[float] = None
    mode: str = "bounded_cov"
    oracle: str = "sketched"
    r: Optional[int] = None
    ell: Optional[int] = None
    epoch_cap: Optional[int] = None
    iter_cap: Optional[int] = None
    seed: Optional[int] = None
    # sub-Gaussian termination: stop once lambda <= xi_scale * xi
    xi_scale: float = 1.0
    # constant on the eps*log(1/eps) term of xi
    xi_log_constant: float = 4.0
    # bounded-cov termination: stop once lambda <= gamma2_scale * gamma2
    gamma2_scale: float = 100.0
    power_accuracy: float = 0.1
    filter: str = "soft"
    unweighted_q: bool = False
    kappa: Optional[float] = None
    oracle_delta: Optional[float] = None

    def __post_init__(self):
        if self.mode == "bounded-cov":
            self.mode = "bounded_cov"
        self.validate()

    def validate(self) -> None:
        if not 0 < self.eps < 0.5:
            raise ConfigError(f"eps must lie in (0, 1/2), got {self.eps}")
        if not 0 < self.delta < 1:
            raise ConfigError(f"delta must lie in (0, 1), got {self.delta}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.oracle not in ORACLES:
            raise ConfigError(f"oracle must be one of {ORACLES}, got {self.oracle!r}")
        for name in ("epoch_cap", "iter_cap"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.gamma2 is not None and self.mode == "bounded_cov" and self.gamma2 <= 0:
            raise ConfigError("gamma2 must be positive in bounded_cov mode")
        if self.filter not in ("soft", "random"):
            raise ConfigError(f"filter must be 'soft' or 'random', got {self.filter!r}")
        if self.r is not None and self.r < 1:
            raise ConfigError("r must be >= 1")
        if self.ell is not None and self.ell < 0:
            raise ConfigError("ell must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)


def default_gammas(cfg: EstimatorConfig, n: int, d: int) -> dict:
    """Goodness thresholds from the concentration bounds, unless overridden."""
    eps, delta = cfg.eps, cfg.delta
    if cfg.mode == "bounded_cov":
        g1 = math.sqrt(2 * d / (n * delta)) + math.sqrt(eps / math.e ** 2)
        g2 = max(1.0, d * (math.log(d) + math.log(2 / delta)) / (0.1 * eps * n))
        out = {"gamma1": g1, "gamma2": g2}
    else:
        ratio = (d + math.log(1 / delta)) / n
        g1 = 2 * math.sqrt(ratio)
        g2 = max(math.sqrt(ratio), ratio)
        beta2 = 4 * math.log(1 / eps) + (d + math.log(1 / delta)) / (eps * n)
        out = {"gamma1": g1, "gamma2": g2, "beta1": math.sqrt(beta2), "beta2": beta2}
    if cfg.gamma1 is not None:
        out["gamma1"] = cfg.gamma1
    if cfg.gamma2 is not None:
        out["gamma2"] = cfg.gamma2
    return out


def xi_threshold(eps: float, gamma1: float, gamma2: float, beta1: float, beta2: float, log_constant: float = 4.0) -> float:
    return gamma2 + 2 * gamma1 ** 2 + 4 * eps ** 2 * beta1 ** 2 + 2 * eps * beta2 + log_constant * eps * math.log(1 / eps)


def default_epoch_cap(kappa: float, n: int) -> int:
    return math.ceil(math.log(max(kappa ** 2, 2.0) * n) / math.log(1.5)) + 4


def default_iter_cap(d: int) -> int:
    return math.ceil(20 * math.log2(d + 2)) + 4


@dataclass
class EpochRecord:
    lambda0: float
    alpha: float
    iterations: int
    mass_removed: float
    wall_time: float
    lambdas: list = field(default_factory=list)
    filtered: list = field(default_factory=list)
    lambda_end: Optional[float] = None


@dataclass
class EpochTrace:
    epochs: list = field(default_factory=list)
    final_lambda: Optional[float] = None
    threshold: Optional[float] = None

    @property
    def lambda_history(self) -> list:
        out = [e.lambda0 for e in self.epochs]
        if self.final_lambda is not None:
            out.append(self.final_lambda)
        return out

    @property
    def total_iterations(self) -> int:
        return sum(e.iterations for e in self.epochs)


class _Runner:
    """Shared state for one filtering run."""

    def __init__(self, data: DataLike, cfg: EstimatorConfig, rng: np.random.Generator | None,
                 callback: Callable | None):
        self.x = as_samples(data)
        self.n, self.d = self.x.shape
        self.cfg = cfg
        self.rng = np.random.default_rng(cfg.seed) if rng is None else rng
        self.callback = callback
        kappa = cfg.kappa
        if kappa is None:
            kappa = float(np.linalg.norm(self.x - self.x.mean(axis=0), axis=1).max())
        self.kappa = max(kappa, 1.0)
        self.epoch_cap = cfg.epoch_cap or default_epoch_cap(self.kappa, self.n)
        self.iter_cap = cfg.iter_cap or default_iter_cap(self.d)
        self.oracle_delta = cfg.oracle_delta or cfg.delta / max(1.0, math.log(self.kappa) * math.log(max(self.d, 2)))
        self.power_fail = self.oracle_delta
        self.shift = 1.0 if cfg.mode == "subgaussian" else 0.0
        self.sketch = SketchParams(r=cfg.r, ell=cfg.ell, delta=self.oracle_delta)

    def spectral(self, w: np.ndarray) -> float:
        op, d = covariance_operator(self.x, w, shift=self.shift)
        est = estimate_spectral_norm(op, d, accuracy=self.cfg.power_accuracy, fail_prob=self.power_fail, rng=self.rng)
        return est.value

    def scores(self, history: WeightHistory, w: np.ndarray):
        if self.cfg.oracle == "exact":
            rep = exact_scores(self.x, history, w)
        else:
            oracle = build_sketched_oracle(self.x, history, w, self.sketch, self.rng)
            rep = sketched_scores(oracle, self.x, w, unweighted_q=self.cfg.unweighted_q)
        return rep.tau, rep.q

    def downweight(self, w: np.ndarray, tau: np.ndarray) -> np.ndarray:
        if self.cfg.filter == "soft":
            return one_d_filter(w, tau, 0.25).new_weights
        live = np.flatnonzero(w > 0)
        keep = random_filter(live, tau, 0.25, self.rng, delta=self.oracle_delta)
        out = np.zeros_like(w)
        out[keep] = w[keep]
        return out

    def run(self, threshold: float, contraction: float, decide, step):
        """Epoch loop. ``decide(w, tau, q, lam0)`` says whether to filter,
        ``step(w, tau)`` returns the filtered weights."""
        trace = EpochTrace(threshold=threshold)
        w = np.full(self.n, 1.0 / self.n)
        for s in range(self.epoch_cap):
            lam = self.spectral(w)
            if lam <= threshold:
                trace.final_lambda = lam
                return (w @ self.x) / w.sum(), w, trace
            start = time.perf_counter()
            alpha = 1.0 / (1.1 * lam)
            rec = EpochRecord(lambda0=lam, alpha=alpha, iterations=0, mass_removed=0.0, wall_time=0.0)
            mass0 = float(w.sum())
            history = WeightHistory(alpha=alpha)
            # every feedback matrix satisfies M(w_t) <= M(w_0), so its norm is
            # at most shift + lam / 0.9 (the estimate is within 10%)
            feedback_bound = self.shift + lam / (1 - self.cfg.power_accuracy)
            lam_t = lam
            for t in range(self.iter_cap + 1):
                if t > 0:
                    lam_t = self.spectral(w)
                rec.lambdas.append(lam_t)
                if lam_t <= contraction * lam:
                    break
                if t == self.iter_cap:
                    break
                history.norm_bound = feedback_bound * len(history)
                tau, q = self.scores(history, w)
                if decide(w, tau, q, lam):
                    w = step(w, tau)
                    rec.filtered.append(True)
                else:
                    rec.filtered.append(False)
                history.append(w)
                rec.iterations += 1
                if self.callback is not None:
                    self.callback(s, t, w)
            rec.lambda_end = lam_t
            rec.mass_removed = mass0 - float(w.sum())
            rec.wall_time = time.perf_counter() - start
            trace.epochs.append(rec)
        raise NonConvergence(f"no termination within {self.epoch_cap} epochs")


def que_score_filter(data: DataLike, cfg: EstimatorConfig, rng: np.random.Generator | None = None,
                     callback: Callable | None = None):
    """Filter for distributions with covariance bounded by the identity.

    Returns ``(mu_hat, weights, trace)``. ``callback(epoch, t, w)`` sees the
    weights after every MMW round.
    """
    if cfg.mode != "bounded_cov":
        raise ConfigError("que_score_filter needs mode='bounded_cov'")
    runner = _Runner(data, cfg, rng, callback)
    g = default_gammas(cfg, runner.n, runner.d)
    threshold = cfg.gamma2_scale * g["gamma2"]

    def decide(w, tau, q, lam0):
        return float(w @ tau) > lam0 / 5

    return runner.run(threshold, 2.0 / 3.0, decide, runner.downweight)


def top_fraction_count(w: np.ndarray, order: np.ndarray, mass: float) -> int:
    """Smallest m with sum of the first m weights (in ``order``) >= mass."""
    cum = np.cumsum(w[order])
    m = int(np.searchsorted(cum, mass - 1e-15, side="left")) + 1
    return min(m, len(order))


def sg_que_score_filter(data: DataLike, cfg: EstimatorConfig, rng: np.random.Generator | None = None,
                        callback: Callable | None = None):
    """Filter for isotropic sub-Gaussian data, tracking ``||M(w) - I||``.

    Only the top ``2 eps`` weighted fraction of scores is downweighted each
    round; the decision uses the augmented score ``q ~ <M(w) - I, U>``.
    """
    if cfg.mode != "subgaussian":
        raise ConfigError("sg_que_score_filter needs mode='subgaussian'")
    runner = _Runner(data, cfg, rng, callback)
    g = default_gammas(cfg, runner.n, runner.d)
    xi = xi_threshold(cfg.eps, g["gamma1"], g["gamma2"], g["beta1"], g["beta2"], cfg.xi_log_constant)
    threshold = cfg.xi_scale * xi

    def decide(w, tau, q, lam0):
        return q > lam0 / (1.1 * 5)

    def step(w, tau):
        idx = np.arange(len(w))
        # score descending, index ascending on ties
        order = np.lexsort((idx, -tau))
        m = top_fraction_count(w, order, 2 * cfg.eps)
        top = order[:m]
        out = w.copy()
        if cfg.filter == "soft":
            out[top] = one_d_filter(w[top], tau[top], 0.25).new_weights
        else:
            live = top[w[top] > 0]
            keep = set(random_filter(live, tau, 0.25, runner.rng, delta=runner.oracle_delta).tolist())
            for i in live:
                if i not in keep:
                    out[i] = 0.0
        return out

    return runner.run(threshold, 0.5, decide, step)


def naive_prune(data: DataLike, radius: float, delta: float, rng: np.random.Generator | None = None):
    """Keep the points within ``4 radius`` of a random certified center.

    A uniformly random sample is certified when strictly more than half of the
    data lie within ``2 radius`` of it. Returns ``(pruned Dataset, kept indices)``.
    """
    if not radius > 0:
        raise ConfigError("radius must be positive")
    x = as_samples(data)
    n = x.shape[0]
    rng = np.random.default_rng() if rng is None else rng
    rounds = max(1, math.ceil(math.log2(2 / delta)))
    for _ in range(rounds):
        c = x[rng.integers(n)]
        dist = np.linalg.norm(x - c, axis=1)
        if np.count_nonzero(dist <= 2 * radius) > n / 2:
            keep = np.flatnonzero(dist <= 4 * radius)
            return Dataset(x[keep]), keep
    raise PruneFailed(f"no center certified in {rounds} rounds")


def prune_radius(mode: str, n: int, d: int, delta: float) -> float:
    if mode == "bounded_cov":
        return math.sqrt(4 * d * n / delta)
    return math.sqrt(4 * d * math.log(n / delta))


@dataclass
class PipelineResult:
    mu_hat: np.ndarray
    trace: EpochTrace
    retained_count: int
    weights: np.ndarray
    retained_index: np.ndarray
    seed: Optional[int]
    mode: str
    oracle: str

    def to_dict(self) -> dict:
        return {
            "mu_hat": [float(v) for v in self.mu_hat],
            "epochs": len(self.trace.epochs),
            "retained": int(self.retained_count),
            "lambda_history": [float(v) for v in self.trace.lambda_history],
            "seed": self.seed,
            "mode": self.mode,
            "oracle": self.oracle,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def estimate_mean_pipeline(data: DataLike, cfg: EstimatorConfig, callback: Callable | None = None) -> PipelineResult:
    """Prune, center, filter, un-center."""
    x = as_samples(data)
    n, d = x.shape
    if n < 2:
        raise QueError("need at least two samples")
    rng = np.random.default_rng(cfg.seed)
    radius = prune_radius(cfg.mode, n, d, cfg.delta)
    pruned, keep = naive_prune(x, radius, cfg.delta / 4, rng)
    xp = pruned.samples
    center = xp.mean(axis=0)
    xc = xp - center
    kappa = radius
    run_cfg = EstimatorConfig(**{**cfg.to_dict(), "kappa": kappa})
    run_cfg.oracle_delta = cfg.oracle_delta or cfg.delta / max(1.0, math.log(kappa) * math.log(max(d, 2)))
    if cfg.mode == "bounded_cov":
        mu, w, trace = que_score_filter(xc, run_cfg, rng, callback)
    else:
        mu, w, trace = sg_que_score_filter(xc, run_cfg, rng, callback)
    return PipelineResult(
        mu_hat=mu + center, trace=trace, retained_count=len(keep), weights=w,
        retained_index=keep, seed=cfg.seed, mode=cfg.mode, oracle=cfg.oracle,
    )
