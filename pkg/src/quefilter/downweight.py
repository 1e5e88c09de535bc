"""Univariate outlier removal driven by nonnegative scores."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidB, NegativeScore, NonTermination

# practical ceiling on the geometric-decay exponent
MAX_STEPS = 2 ** 60


@dataclass
class FilterOutcome:
    new_weights: np.ndarray
    steps_taken: int
    final_weighted_sum: float


def _check(tau: np.ndarray, b: float) -> None:
    if not 0 < b < 1:
        raise InvalidB(f"b must lie in (0, 1), got {b}")
    if np.any(tau < 0) or not np.all(np.isfinite(tau)):
        raise NegativeScore("scores must be finite and nonnegative")


def _decayed(w: np.ndarray, ratio: np.ndarray, t: int) -> np.ndarray:
    # np.power on integer exponents uses repeated squaring
    return w * np.power(1.0 - ratio, t)


def one_d_filter(w, tau, b: float = 0.25) -> FilterOutcome:
    """Soft downweighting: ``w_i <- (1 - tau_i / tau_max)^t w_i``.

    ``t`` is the smallest positive integer with ``sum_i w_i^(t) tau_i <= b *
    sigma`` where ``sigma = sum_i w_i tau_i``; the sum is nonincreasing in
    ``t`` so a binary search over ``1 .. ceil(tau_max / (e b sigma))`` finds it.
    """
    w = np.asarray(w, dtype=np.float64).ravel()
    tau = np.asarray(tau, dtype=np.float64).ravel()
    if w.shape != tau.shape:
        raise ValueError("w and tau must have the same length")
    _check(tau, b)
    sigma = float(w @ tau)
    tau_max = float(tau.max()) if tau.size else 0.0
    if sigma <= 0 or tau_max <= 0:
        return FilterOutcome(w.copy(), 0, sigma)

    ratio = tau / tau_max
    target = b * sigma

    def f(t):
        return float(_decayed(w, ratio, t) @ tau)

    hi = max(1, math.ceil(tau_max / (math.e * b * sigma)))
    if hi > MAX_STEPS:
        raise NonTermination(f"search range {hi} exceeds the practical cap; tau_max/sigma too extreme")
    # the range bound is exact in real arithmetic; widen it if rounding bites
    while f(hi) > target:
        if hi >= MAX_STEPS:
            raise NonTermination("weighted score sum never reached the target")
        hi = min(2 * hi, MAX_STEPS)
    lo = 1
    while lo < hi:
        mid = (lo + hi) // 2
        if f(mid) <= target:
            hi = mid
        else:
            lo = mid + 1
    new_w = _decayed(w, ratio, lo)
    return FilterOutcome(new_w, lo, float(new_w @ tau))


def random_round_cap(tau_max: float, m: int, b: float, sigma: float, delta: float, c: float = 4.0) -> int:
    return math.ceil(c * math.log(tau_max * m / (b * sigma) + 2) * math.log(2 / delta))


def random_filter(indices, tau, b: float = 0.25, rng: np.random.Generator | None = None,
                  delta: float = 0.01, c: float = 4.0) -> np.ndarray:
    """Hard filter: drop each survivor with probability ``tau_i / tau_max(T)``.

    ``tau`` is indexed by the entries of ``indices`` (so ``tau[i]`` is the score
    of sample ``i``). Rounds repeat while the surviving score sum exceeds
    ``b * sigma``. Returns the sorted surviving indices.
    """
    idx = np.unique(np.asarray(list(indices), dtype=np.int64))
    tau = np.asarray(tau, dtype=np.float64)
    _check(tau[idx] if idx.size else tau[:0], b)
    rng = np.random.default_rng() if rng is None else rng
    scores = tau[idx]
    sigma = float(scores.sum())
    if sigma <= 0:
        return idx
    cap = random_round_cap(float(scores.max()), idx.size, b, sigma, delta, c)
    alive = np.ones(idx.size, dtype=bool)
    rounds = 0
    while float(scores[alive].sum()) > b * sigma:
        if rounds >= cap:
            raise NonTermination(f"random filter exceeded {cap} rounds")
        live = np.flatnonzero(alive)
        tmax = scores[live].max()
        drop = rng.random(live.size) < scores[live] / tmax
        alive[live[drop]] = False
        rounds += 1
    return idx[alive]
