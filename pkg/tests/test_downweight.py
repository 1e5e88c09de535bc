import numpy as np
import pytest

from helpers import filter_instance, filter_sum
from quefilter.downweight import one_d_filter, random_filter, random_round_cap
from quefilter.errors import InvalidB, NegativeScore, NonTermination


def test_three_point_example():
    out = one_d_filter(np.full(3, 1 / 3), np.array([9.0, 0, 0]), 0.25)
    assert out.steps_taken == 1
    assert np.allclose(out.new_weights, [0, 1 / 3, 1 / 3])
    assert out.final_weighted_sum == 0.0


def test_zero_scores_unchanged():
    w = np.array([0.2, 0.3])
    out = one_d_filter(w, np.zeros(2))
    assert out.steps_taken == 0 and np.array_equal(out.new_weights, w)


def test_single_point_zeroed():
    out = one_d_filter(np.array([1.0]), np.array([5.0]), 0.25)
    assert out.steps_taken == 1 and out.new_weights[0] == 0.0


def test_errors():
    with pytest.raises(NegativeScore):
        one_d_filter([0.5, 0.5], [1.0, -0.1])
    for b in (0.0, 1.0, -1.0):
        with pytest.raises(InvalidB):
            one_d_filter([0.5, 0.5], [1.0, 2.0], b)


def test_minimal_step_and_postconditions(rng):
    for _ in range(300):
        w, tau, bad = filter_instance(rng)
        out = one_d_filter(w, tau, 0.25)
        sigma = float(w @ tau)
        assert out.final_weighted_sum <= 0.25 * sigma + 1e-12
        assert np.all(out.new_weights <= w)
        assert out.final_weighted_sum == pytest.approx(float(out.new_weights @ tau), abs=1e-10)
        if out.steps_taken >= 2:
            assert filter_sum(w, tau, out.steps_taken - 1) > 0.25 * sigma
        removed = w - out.new_weights
        assert removed[~bad].sum() <= removed[bad].sum() + 1e-12


def test_filter_sum_nonincreasing(rng):
    w, tau, _ = filter_instance(rng)
    vals = [filter_sum(w, tau, t) for t in range(1, 60)]
    assert all(a >= b - 1e-15 for a, b in zip(vals, vals[1:]))


def test_large_ratio_search():
    # tau_max / sigma is huge; search range widens but stays finite
    w = np.array([0.999999, 1e-6])
    tau = np.array([1e-9, 1.0])
    out = one_d_filter(w, tau, 0.25)
    assert out.final_weighted_sum <= 0.25 * float(w @ tau)


def test_random_filter_zero_scores(rng):
    assert list(random_filter([3, 1, 2], np.zeros(5), 0.25, rng)) == [1, 2, 3]


def test_random_filter_removes_certain_point(rng):
    tau = np.array([1.0, 0, 0, 0])
    for seed in range(20):
        keep = random_filter(range(4), tau, 0.5, np.random.default_rng(seed))
        assert list(keep) == [1, 2, 3]


def test_random_filter_removes_more_bad(rng):
    w, tau, bad = filter_instance(np.random.default_rng(5), eta=0.1)
    idx = np.arange(len(tau))
    good_removed = bad_removed = 0
    for seed in range(1000):
        keep = set(random_filter(idx, tau, 0.25, np.random.default_rng(seed)).tolist())
        dropped = np.array([i not in keep for i in idx])
        good_removed += int(dropped[~bad].sum())
        bad_removed += int(dropped[bad].sum())
    assert bad_removed > good_removed


def test_random_filter_round_cap():
    assert random_round_cap(1.0, 10, 0.25, 1.0, 0.01) == int(np.ceil(4 * np.log(42) * np.log(200)))
    # the cap rounds up to a single round, which cannot push a long tail below 1%
    tau = 1.0 / np.arange(1, 201)
    with pytest.raises(NonTermination):
        random_filter(range(200), tau, 0.01, np.random.default_rng(0), delta=0.999999, c=0.01)
