"""Datasets, weight vectors and weighted second moments.

``M(w)`` here is always the *unnormalized* weighted covariance

    M(w) = sum_i w_i (X_i - mu(w)) (X_i - mu(w))^T,   mu(w) = sum_i w_i X_i / |w|

and is only ever touched through matrix-vector products unless a caller asks
for a dense copy explicitly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import DimensionMismatch, InvalidEpsilon, QueError, ZeroMass

MASS_TOL = 1e-12


@dataclass(frozen=True)
class Dataset:
    """``n`` samples in ``R^d`` stored row-wise. Immutable after construction."""

    samples: np.ndarray

    def __post_init__(self):
        x = np.array(self.samples, dtype=np.float64, copy=True)
        if x.ndim == 1:
            x = x[:, None]
        if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
            raise DimensionMismatch(f"samples must be a non-empty n x d array, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise QueError("samples contain NaN or Inf")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def d(self) -> int:
        return self.samples.shape[1]

    def __len__(self):
        return self.n

    def __array__(self, dtype=None, copy=None):
        return self.samples if dtype is None else self.samples.astype(dtype)

    def subset(self, idx) -> "Dataset":
        return Dataset(self.samples[np.asarray(idx)])


@dataclass(frozen=True)
class WeightVector:
    """Nonnegative per-sample weights with total mass at most one."""

    w: np.ndarray
    mass: float = field(init=False)

    def __post_init__(self):
        w = np.array(self.w, dtype=np.float64, copy=True).ravel()
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise QueError("weights must be finite and nonnegative")
        mass = float(w.sum())
        if mass > 1 + MASS_TOL:
            raise QueError(f"total weight {mass} exceeds 1")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "mass", mass)

    @classmethod
    def uniform(cls, n: int) -> "WeightVector":
        return cls(np.full(n, 1.0 / n))

    def __len__(self):
        return self.w.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.w if dtype is None else self.w.astype(dtype)

    def in_simplex(self) -> bool:
        return bool(np.all(self.w >= 0) and self.mass <= 1 + MASS_TOL)

    def is_capped(self, n: int | None = None) -> bool:
        """True when every weight is at most ``1/n``."""
        n = len(self) if n is None else n
        return bool(np.all(self.w <= 1.0 / n + MASS_TOL))


@dataclass(frozen=True)
class SpectralEstimate:
    value: float
    iterations_used: int
    relative_accuracy: float

    def __float__(self):
        return self.value


DataLike = Union[Dataset, np.ndarray]
WeightLike = Union[WeightVector, np.ndarray]


def as_samples(data: DataLike) -> np.ndarray:
    if isinstance(data, Dataset):
        return data.samples
    x = np.asarray(data, dtype=np.float64)
    return x[:, None] if x.ndim == 1 else x


def as_weights(w: WeightLike, n: int) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64).ravel()
    if w.shape[0] != n:
        raise DimensionMismatch(f"weight vector has length {w.shape[0]}, expected {n}")
    return w


def _mass(w: np.ndarray) -> float:
    mass = float(w.sum())
    if not mass > 0:
        raise ZeroMass("weight vector has zero total mass")
    return mass


def weighted_mean(data: DataLike, w: WeightLike) -> np.ndarray:
    """Return ``mu(w) = sum_i w_i X_i / |w|``."""
    x = as_samples(data)
    w = as_weights(w, x.shape[0])
    return (w @ x) / _mass(w)


def _check_vec(v, d: int) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.shape[0] != d:
        raise DimensionMismatch(f"vector has leading dimension {v.shape[0]}, expected {d}")
    return v


def weighted_cov_matvec(data: DataLike, w: WeightLike, v) -> np.ndarray:
    """Apply ``M(w)`` to ``v`` (a vector or a ``d x k`` block) in O(ndk)."""
    x = as_samples(data)
    w = as_weights(w, x.shape[0])
    mu = (w @ x) / _mass(w)
    v = _check_vec(v, x.shape[1])
    # y_i = (X_i - mu)^T v, computed without materializing X - mu
    y = x @ v - mu @ v
    wy = w * y if y.ndim == 1 else w[:, None] * y
    return x.T @ wy - np.multiply.outer(mu, wy.sum(axis=0))


def weighted_cov_shifted_matvec(data: DataLike, w: WeightLike, v) -> np.ndarray:
    """Apply ``M(w) - I`` to ``v``."""
    v = np.asarray(v, dtype=np.float64)
    return weighted_cov_matvec(data, w, v) - v


def weighted_cov_dense(data: DataLike, w: WeightLike) -> np.ndarray:
    """Form ``M(w)`` explicitly; O(n d^2)."""
    x = as_samples(data)
    w = as_weights(w, x.shape[0])
    xc = x - (w @ x) / _mass(w)
    m = (xc.T * w) @ xc
    return 0.5 * (m + m.T)


def power_iterations(dim: int, accuracy: float) -> int:
    return math.ceil(10 * math.log(dim + 1) / accuracy)


def power_restarts(fail_prob: float) -> int:
    return max(1, math.ceil(math.log2(2.0 / fail_prob)))


def estimate_spectral_norm(
    matvec: Callable[[np.ndarray], np.ndarray],
    dim: int,
    accuracy: float = 0.1,
    fail_prob: float = 0.01,
    rng: np.random.Generator | None = None,
) -> SpectralEstimate:
    """Estimate the largest eigenvalue magnitude of a symmetric operator.

    All restarts run simultaneously as the columns of one ``dim x R`` block;
    ``matvec`` must therefore accept a 2-D block. The estimate is the largest
    ``||A v|| / ||v||`` over the final iterates, which never exceeds ``||A||_2``
    and, unlike the Rayleigh quotient, does not cancel when the spectrum has
    eigenvalues of both signs with equal magnitude.
    """
    if not 0 < accuracy <= 0.5:
        raise ValueError("accuracy must lie in (0, 0.5]")
    if not 0 < fail_prob < 1:
        raise ValueError("fail_prob must lie in (0, 1)")
    rng = np.random.default_rng() if rng is None else rng
    iters = power_iterations(dim, accuracy)
    restarts = power_restarts(fail_prob)

    v = rng.standard_normal((dim, restarts))
    v /= np.linalg.norm(v, axis=0)
    used = 0
    value = 0.0
    for used in range(1, iters + 1):
        av = np.asarray(matvec(v))
        if av.shape != v.shape:
            raise DimensionMismatch(f"operator returned shape {av.shape}, expected {v.shape}")
        norms = np.linalg.norm(av, axis=0)
        value = float(norms.max())
        if value <= 1e-300:
            value = 0.0
            break
        if used == iters:
            break
        v = av / np.where(norms > 0, norms, 1.0)
    return SpectralEstimate(value=value, iterations_used=used, relative_accuracy=accuracy)


def dense_operator(a: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    a = np.asarray(a, dtype=np.float64)
    return lambda v: a @ v


def covariance_operator(data: DataLike, w: WeightLike, shift: float = 0.0, dense: bool | None = None):
    """Return ``v -> (M(w) - shift I) v`` plus the dimension.

    ``dense=None`` picks whichever is cheaper for a power-method call: forming
    ``M(w)`` once costs ``n d^2``, the implicit route costs ``n d`` per product.
    """
    x = as_samples(data)
    n, d = x.shape
    if dense is None:
        dense = d <= 256
    if dense:
        m = weighted_cov_dense(x, w)
        if shift:
            m = m - shift * np.eye(d)
        return dense_operator(m), d

    def op(v):
        out = weighted_cov_matvec(x, w, v)
        return out - shift * v if shift else out

    return op, d


def bucket_reduce(data: DataLike, eps: float, rng: np.random.Generator | None = None) -> Dataset:
    """Average random disjoint buckets of size ``floor(1/(10 eps))``.

    Produces ``floor(10 eps n)`` points; leftover samples are dropped.
    """
    x = as_samples(data)
    n = x.shape[0]
    if not (0 < eps <= 1 / 20):
        raise InvalidEpsilon(f"eps must lie in (0, 1/20], got {eps}")
    # small slack so eps = 1/(10 n) is not lost to rounding
    n_buckets = math.floor(10 * eps * n + 1e-9)
    size = math.floor(1 / (10 * eps) + 1e-9)
    if n_buckets < 1 or size < 1 or n_buckets * size > n:
        raise InvalidEpsilon(f"eps={eps} gives no complete bucket for n={n}")
    rng = np.random.default_rng() if rng is None else rng
    perm = rng.permutation(n)[: n_buckets * size]
    return Dataset(x[perm].reshape(n_buckets, size, x.shape[1]).mean(axis=1))
