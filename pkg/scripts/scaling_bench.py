"""Wall time of the estimation pipeline as n doubles, with the filter idle
(eps-corrupted data) and engaged (far planted outliers)."""
import argparse
import statistics
import time

import numpy as np

from quefilter.robust_mean import EstimatorConfig, estimate_mean_pipeline
from quefilter.synthetic import gen_eps_corrupted


def engaged_data(d, n, eps, seed):
    r = np.random.default_rng(seed)
    x = r.standard_normal((n, d))
    m = int(np.ceil(eps * n))
    x[:m] = 0.2 * r.standard_normal((m, d))
    x[:m, 0] += 100.0
    return x


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--d", type=int, default=64)
    p.add_argument("--n-list", type=int, nargs="+", default=[10000, 20000, 40000, 80000])
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--oracle", default="sketched", choices=("exact", "sketched"))
    p.add_argument("--repeats", type=int, default=3)
    args = p.parse_args()

    print("regime,n,median_seconds,iterations,ratio_to_previous")
    for regime in ("idle", "engaged"):
        prev = None
        for n in sorted(args.n_list):
            if regime == "idle":
                x = gen_eps_corrupted(args.d, n, args.eps, "directional", rng=0)[0].samples
            else:
                x = engaged_data(args.d, n, args.eps, 0)
            cfg = EstimatorConfig(eps=args.eps, oracle=args.oracle, seed=0)
            times, iters = [], 0
            for _ in range(args.repeats):
                start = time.perf_counter()
                res = estimate_mean_pipeline(x, cfg)
                times.append(time.perf_counter() - start)
                iters = res.trace.total_iterations
            med = statistics.median(times)
            ratio = "" if prev is None else f"{med / prev:.2f}"
            print(f"{regime},{n},{med:.4f},{iters},{ratio}", flush=True)
            prev = med


if __name__ == "__main__":
    main()
