"""Outlier scoring: QUE scores, the l2 and naive-spectral baselines,
whitening, and ROC-AUC."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import special, stats

from .errors import ConfigError, DegenerateCovariance, OneClassOnly, SingularReference
from .matexp import default_r
from .moments import DataLike, Dataset, as_samples, estimate_spectral_norm, power_iterations, power_restarts

CHEB_DEGREE = 5
# past this many squarings the matvec form of scaling-and-squaring is impractical
MAX_SQUARINGS = 12


def _centered(data: DataLike) -> np.ndarray:
    x = as_samples(data)
    if x.shape[0] < 2:
        raise ConfigError("need at least two samples")
    return x - x.mean(axis=0)


def _cov_op(xc: np.ndarray):
    n = xc.shape[0]
    return lambda v: xc.T @ (xc @ v) / n


def chebyshev_exp_coefficients(degree: int = CHEB_DEGREE) -> np.ndarray:
    """Chebyshev series of ``exp`` on [-1, 1]: ``I_0(1) + 2 sum_k I_k(1) T_k``."""
    c = 2.0 * special.iv(np.arange(degree + 1), 1.0)
    c[0] /= 2.0
    return c


def chebyshev_matvec(op, v: np.ndarray, coef: np.ndarray) -> np.ndarray:
    """Apply ``sum_k coef_k T_k(B)`` to ``v`` by the three-term recurrence."""
    t_prev = v
    out = coef[0] * v
    if len(coef) == 1:
        return out
    t_cur = op(v)
    out = out + coef[1] * t_cur
    for c in coef[2:]:
        t_prev, t_cur = t_cur, 2.0 * op(t_cur) - t_prev
        out = out + c * t_cur
    return out


def squarings_for(alpha: float) -> int:
    return math.ceil(math.log2(max(1.0, alpha)))


def que_scores(data: DataLike, alpha: float = 4.0, mode: str = "exact", r: Optional[int] = None,
               delta: float = 0.1, rng: np.random.Generator | int | None = None,
               degree: int = CHEB_DEGREE) -> np.ndarray:
    """Quantum-entropy outlier scores.

    ``tau_i = (X_i - mu)^T exp(a S / ||S||) (X_i - mu) / tr exp(a S / ||S||)``
    with ``S`` the empirical covariance (1/n). ``mode="exact"`` diagonalizes
    ``S``. ``mode="approx"`` applies a degree-5 Chebyshev approximation of
    ``exp`` to ``a S / (2 ||S|| 2^s)``, repeats it ``2^s`` times
    (``s = ceil(log2 max(1, a))``) to get ``exp(a S / 2||S||)``, and pushes a
    Gaussian sketch through it, so no d x d matrix is formed.
    """
    if alpha < 0:
        raise ConfigError("alpha must be nonnegative")
    xc = _centered(data)
    n, d = xc.shape
    if mode == "exact":
        if alpha == 0:
            # U = I/d
            if np.allclose(xc, 0):
                raise DegenerateCovariance("empirical covariance is zero")
            return np.einsum("ij,ij->i", xc, xc) / d
        cov = xc.T @ xc / n
        evals, evecs = np.linalg.eigh(0.5 * (cov + cov.T))
        top = evals[-1]
        if not top > 1e-300 or np.allclose(xc, 0):
            raise DegenerateCovariance("empirical covariance is zero")
        expo = alpha * evals / top
        e = np.exp(expo - expo.max())
        e /= e.sum()
        proj = xc @ evecs
        return np.maximum((proj * proj) @ e, 0.0)
    if mode != "approx":
        raise ConfigError(f"mode must be 'exact' or 'approx', got {mode!r}")

    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    op = _cov_op(xc)
    norm = estimate_spectral_norm(op, d, accuracy=0.1, fail_prob=min(delta, 0.01), rng=gen).value
    if not norm > 1e-300:
        raise DegenerateCovariance("empirical covariance is zero")
    s = squarings_for(alpha)
    if s > MAX_SQUARINGS:
        raise ConfigError(f"alpha={alpha} needs {s} squarings; use mode='exact'")
    scale = alpha / (2.0 * norm * 2 ** s)
    coef = chebyshev_exp_coefficients(degree)
    r = default_r(n, d, delta) if r is None else int(r)
    if r >= d:
        sk = np.eye(d)
    else:
        sk = gen.standard_normal((r, d)) / math.sqrt(r)
    block = sk.T
    for _ in range(2 ** s):
        block = chebyshev_matvec(lambda v: scale * op(v), block, coef)
    a = block.T
    proj = xc @ a.T
    return np.einsum("ij,ij->i", proj, proj) / float(np.sum(a * a))


def baseline_l2(data: DataLike) -> np.ndarray:
    """Distance of each sample to the empirical mean."""
    return np.linalg.norm(_centered(data), axis=1)


def top_eigenvector(op, d: int, rng: np.random.Generator | None = None, accuracy: float = 0.1,
                    fail_prob: float = 0.01) -> tuple:
    """Power method; returns ``(eigenvalue estimate, unit vector)``."""
    rng = np.random.default_rng() if rng is None else rng
    v = rng.standard_normal((d, power_restarts(fail_prob)))
    v /= np.linalg.norm(v, axis=0)
    for _ in range(power_iterations(d, accuracy)):
        av = op(v)
        norms = np.linalg.norm(av, axis=0)
        if norms.max() <= 1e-300:
            break
        v = av / np.where(norms > 0, norms, 1.0)
    rq = np.einsum("ij,ij->j", v, op(v))
    j = int(np.argmax(rq))
    return float(rq[j]), v[:, j]


def baseline_spectral(data: DataLike, rng: np.random.Generator | int | None = None) -> np.ndarray:
    """Squared projection onto the top eigenvector of the empirical covariance."""
    xc = _centered(data)
    if np.allclose(xc, 0):
        raise DegenerateCovariance("empirical covariance is zero")
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    lam, v = top_eigenvector(_cov_op(xc), xc.shape[1], gen)
    if not lam > 0:
        raise DegenerateCovariance("empirical covariance is zero")
    return (xc @ v) ** 2


@dataclass(frozen=True)
class WhiteningTransform:
    kind: str
    matrix: np.ndarray
    k: Optional[int] = None
    ridge: float = 1e-6
    power: float = -0.5
    eigenvalues: Optional[np.ndarray] = None
    eigenvectors: Optional[np.ndarray] = None


WHITEN_POWERS = {"invsqrt": -0.5, "inv": -1.0}


def fit_whitening(reference: DataLike | None, kind: str = "exact", k: Optional[int] = None,
                  ridge: float = 1e-6, power: float | str = -0.5, d: Optional[int] = None) -> WhiteningTransform:
    """Fit ``W`` from a clean reference sample.

    ``exact``: ``(C + ridge I)^power``; ``topk``: ``sum_{i<=k} (l_i + ridge)^power
    v_i v_i^T + P_perp`` from the top-k eigenpairs; ``identity``: ``I``.
    ``power`` defaults to -1/2 (isotropic output); ``"inv"`` selects -1.
    """
    if isinstance(power, str):
        power = WHITEN_POWERS[power]
    if kind == "identity":
        if d is None:
            d = as_samples(reference).shape[1]
        return WhiteningTransform("identity", np.eye(d), ridge=ridge, power=power)
    if not ridge > 0:
        raise ConfigError("ridge must be positive")
    x = as_samples(reference)
    n, d = x.shape
    xc = x - x.mean(axis=0)
    cov = xc.T @ xc / n
    evals, evecs = np.linalg.eigh(0.5 * (cov + cov.T))
    evals = np.maximum(evals, 0.0)
    if kind == "exact":
        if n < d + 1:
            raise SingularReference(f"exact whitening needs n >= d + 1 reference samples (n={n}, d={d})")
        shifted = evals + ridge
        if shifted.max() / shifted.min() > 1e12:
            raise SingularReference("reference covariance is too ill-conditioned")
        w = (evecs * shifted ** power) @ evecs.T
        return WhiteningTransform("exact", 0.5 * (w + w.T), ridge=ridge, power=power,
                                  eigenvalues=evals, eigenvectors=evecs)
    if kind == "topk":
        if k is None or not 1 <= k <= d:
            raise ConfigError(f"topk whitening needs 1 <= k <= d, got k={k}")
        lam = evals[::-1][:k]
        vec = evecs[:, ::-1][:, :k]
        if np.any(lam <= 0):
            raise SingularReference("top-k eigenvalues must be positive")
        w = (vec * (lam + ridge) ** power) @ vec.T + (np.eye(d) - vec @ vec.T)
        return WhiteningTransform("topk", 0.5 * (w + w.T), k=k, ridge=ridge, power=power,
                                  eigenvalues=lam, eigenvectors=vec)
    raise ConfigError(f"unknown whitening kind {kind!r}")


def apply_whitening(transform: WhiteningTransform, data: DataLike) -> Dataset:
    x = as_samples(data)
    if x.shape[1] != transform.matrix.shape[0]:
        raise ConfigError(f"transform is {transform.matrix.shape[0]}-dimensional, data is {x.shape[1]}")
    return Dataset(x @ transform.matrix)


@dataclass
class LabeledScores:
    tau: np.ndarray
    labels: np.ndarray  # 1 = outlier


def rocauc(scored: LabeledScores | np.ndarray, labels: np.ndarray | None = None, ties: str = "half") -> float:
    """Probability that a random outlier outscores a random inlier.

    ``ties="half"`` counts equal scores as 1/2; ``ties="geq"`` counts them as 1.
    """
    if isinstance(scored, LabeledScores):
        tau, labels = scored.tau, scored.labels
    else:
        tau = scored
    tau = np.asarray(tau, dtype=float)
    labels = np.asarray(labels).astype(bool)
    if tau.shape != labels.shape:
        raise ConfigError("scores and labels differ in length")
    n_out = int(labels.sum())
    n_in = labels.size - n_out
    if n_out == 0 or n_in == 0:
        raise OneClassOnly("need at least one inlier and one outlier")
    if ties == "half":
        ranks = stats.rankdata(tau)
        u = ranks[labels].sum() - n_out * (n_out + 1) / 2.0
        return float(u / (n_out * n_in))
    if ties == "geq":
        inl = np.sort(tau[~labels])
        return float(np.searchsorted(inl, tau[labels], side="right").sum() / (n_out * n_in))
    raise ConfigError(f"ties must be 'half' or 'geq', got {ties!r}")
