"""Instance generators shared by the unit, property and acceptance tests."""
import numpy as np


def filter_instance(rng, eta=0.12):
    """Random (w, tau, bad) with sum_{good} w tau <= eta * sum w tau."""
    m = int(rng.integers(2, 60))
    bad = rng.random(m) < rng.uniform(0.05, 0.5)
    bad[rng.integers(m)] = True
    w = rng.uniform(0.1, 1.0, m) / m
    tau = np.where(bad, rng.exponential(10.0, m), rng.exponential(1.0, m))
    good_sum = float(w[~bad] @ tau[~bad])
    bad_sum = float(w[bad] @ tau[bad])
    # rescale the good scores so their share is at most eta
    limit = eta * bad_sum / (1 - eta)
    if good_sum > limit and good_sum > 0:
        tau[~bad] *= limit / good_sum * rng.uniform(0.0, 1.0)
    return w, tau, bad


def filter_sum(w, tau, t):
    return float((w * (1 - tau / tau.max()) ** t) @ tau)
