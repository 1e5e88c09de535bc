import math

import numpy as np
import pytest

from quefilter.errors import ConfigError
from quefilter.synthetic import CorruptionSpec, gen_eps_corrupted, gen_synthetic


def test_planted_counts_and_placement():
    ds, labels, mu = gen_synthetic(8, 1000, CorruptionSpec(eps=0.2, k=1), rng=0)
    assert ds.n == 1000 and labels.sum() == 200 and (labels == 0).sum() == 800
    out = ds.samples[labels == 1]
    assert np.allclose(np.abs(out[:, 0]), math.sqrt(5), atol=1.0)
    assert (out[:, 0] > 0).sum() == 100
    assert np.array_equal(mu, np.zeros(8))


def test_planted_no_corruption():
    ds, labels, _ = gen_synthetic(4, 50, CorruptionSpec(eps=0.0, k=3), rng=1)
    assert ds.n == 50 and labels.sum() == 0


def test_planted_k_equals_d():
    d, n, eps = 5, 1000, 0.1
    ds, labels, _ = gen_synthetic(d, n, CorruptionSpec(eps=eps, k=d), rng=2)
    out = ds.samples[labels == 1]
    axis = np.argmax(np.abs(out), axis=1)
    assert all((axis == i).sum() == math.ceil(eps * n / d) for i in range(d))


def test_corruption_spec_validation():
    with pytest.raises(ConfigError):
        CorruptionSpec(eps=0.2, k=2, weights=[0.1, 0.05])
    with pytest.raises(ConfigError):
        CorruptionSpec(eps=1.0)
    with pytest.raises(ConfigError):
        gen_synthetic(2, 10, CorruptionSpec(eps=0.1, k=3))


def test_eps_corrupted_clean():
    ds, labels, mu = gen_eps_corrupted(6, 300, 0.0, rng=0)
    assert labels.sum() == 0 and abs(np.linalg.norm(mu) - 1) < 1e-12


def test_eps_corrupted_directional_bias():
    ds, labels, mu = gen_eps_corrupted(32, 20000, 0.1, "directional", rng=0)
    assert labels.sum() == 2000
    assert np.linalg.norm(ds.samples.mean(axis=0) - mu) >= 0.25


@pytest.mark.parametrize("adv", ["directional", "norm_inflation", "mixture"])
def test_eps_corrupted_deterministic(adv):
    a = gen_eps_corrupted(5, 200, 0.2, adv, rng=9)
    b = gen_eps_corrupted(5, 200, 0.2, adv, rng=9)
    assert np.array_equal(a[0].samples, b[0].samples) and np.array_equal(a[1], b[1])


def test_eps_corrupted_rejects_bad_input():
    with pytest.raises(ConfigError):
        gen_eps_corrupted(3, 10, 0.5)
    with pytest.raises(ConfigError):
        gen_eps_corrupted(3, 10, 0.1, "sneaky")
