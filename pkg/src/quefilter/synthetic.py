"""Synthetic inliers plus adversarial corruption, with ground-truth labels.

Labels are 1 for outliers and 0 for inliers throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError
from .moments import Dataset

ADVERSARIES = ("directional", "norm_inflation", "mixture")


def _ceil(x: float) -> int:
    # tolerate representation error, e.g. 0.8 * 1000
    return math.ceil(x - 1e-9)


@dataclass
class CorruptionSpec:
    """Mixture of inliers N(0, I) and 2k outlier clusters at +-C sqrt(k/eps) e_i."""

    eps: float
    k: int = 1
    magnitude: float = 1.0
    sigma: float = 0.2
    weights: Optional[Sequence[float]] = None
    adversary: str = "directional_mixture"

    def __post_init__(self):
        if not 0 <= self.eps < 1:
            raise ConfigError(f"eps must lie in [0, 1), got {self.eps}")
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if self.weights is None:
            self.weights = [self.eps / self.k] * self.k
        self.weights = [float(v) for v in self.weights]
        if len(self.weights) != self.k:
            raise ConfigError("need one weight per corruption direction")
        if abs(sum(self.weights) - self.eps) > 1e-12:
            raise ConfigError(f"direction weights sum to {sum(self.weights)}, expected eps={self.eps}")

    def validate(self, d: int) -> None:
        if self.k > d:
            raise ConfigError(f"k={self.k} exceeds d={d}")


def gen_synthetic(d: int, n: int, spec: CorruptionSpec, rng: np.random.Generator | int | None = None):
    """Sample the planted mixture with deterministic class counts.

    Emits ``ceil((1-eps) n)`` inliers and ``ceil(eps_i n)`` outliers per
    direction, split as evenly as possible between the two signs. Rows are
    shuffled. Returns ``(Dataset, labels, true_mean)``.
    """
    spec.validate(d)
    rng = np.random.default_rng(rng)
    n_in = _ceil((1 - spec.eps) * n)
    parts = [rng.standard_normal((n_in, d))]
    labels = [np.zeros(n_in, dtype=int)]
    if spec.eps > 0:
        scale = spec.magnitude * math.sqrt(spec.k / spec.eps)
        for i, ei in enumerate(spec.weights):
            count = _ceil(ei * n)
            plus = (count + 1) // 2
            for sign, c in ((1.0, plus), (-1.0, count - plus)):
                if c == 0:
                    continue
                pts = spec.sigma * rng.standard_normal((c, d))
                pts[:, i] += sign * scale
                parts.append(pts)
                labels.append(np.ones(c, dtype=int))
    x = np.vstack(parts)
    y = np.concatenate(labels)
    perm = rng.permutation(len(y))
    return Dataset(x[perm]), y[perm], np.zeros(d)


def _unit(rng, d):
    u = rng.standard_normal(d)
    return u / np.linalg.norm(u)


def gen_eps_corrupted(d: int, n: int, eps: float, adversary: str = "directional",
                      rng: np.random.Generator | int | None = None, k: int = 3):
    """``n`` draws from N(mu, I) with ``ceil(eps n)`` of them replaced.

    ``mu`` is uniform on the unit sphere. The adversary deletes the samples
    most extreme (in absolute projection) along a random unit direction ``v``
    and inserts, with ``u`` a second independent random direction:

    - ``directional``: points at ``mu + 0.9/sqrt(eps) u`` with inlier-like
      spread orthogonal to ``u``, shifting the mean by about ``0.9 sqrt(eps)``;
    - ``norm_inflation``: fresh N(0, I) draws scaled by 3 around ``mu``;
    - ``mixture``: ``k`` random orthogonal directions, each hosting an equal
      share of points at ``0.9 sqrt(k/eps)`` along it.

    Returns ``(Dataset, labels, true_mean)``.
    """
    if not 0 <= eps < 0.5:
        raise ConfigError(f"eps must lie in [0, 1/2), got {eps}")
    if adversary not in ADVERSARIES:
        raise ConfigError(f"unknown adversary {adversary!r}; choose from {ADVERSARIES}")
    rng = np.random.default_rng(rng)
    mu = _unit(rng, d)
    z = rng.standard_normal((n, d))
    labels = np.zeros(n, dtype=int)
    m = _ceil(eps * n)
    if m == 0:
        return Dataset(mu + z), labels, mu
    v = _unit(rng, d)
    u = _unit(rng, d)
    extreme = np.argsort(-np.abs(z @ v), kind="stable")[:m]
    noise = rng.standard_normal((m, d))
    if adversary == "directional":
        noise -= np.outer(noise @ u, u)
        repl = noise + (0.9 / math.sqrt(eps)) * u
    elif adversary == "norm_inflation":
        repl = 3.0 * noise
    else:
        kk = max(1, min(k, d))
        q, _ = np.linalg.qr(rng.standard_normal((d, kk)))
        dirs = q.T
        repl = noise.copy()
        share = np.array_split(np.arange(m), kk)
        for j, rows in enumerate(share):
            v = dirs[j]
            repl[rows] -= np.outer(repl[rows] @ v, v)
            repl[rows] += 0.9 * math.sqrt(kk / eps) * v
    z[extreme] = repl
    labels[extreme] = 1
    return Dataset(mu + z), labels, mu
