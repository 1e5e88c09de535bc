"""Command-line front end: gen, estimate, score, eval, bench.

Exit codes: 0 success, 1 data error, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import statistics
import sys
import time
from dataclasses import asdict, dataclass, field
from typing import Optional

from . import formats
from .errors import ConfigError, QueError
from .outliers import apply_whitening, baseline_l2, baseline_spectral, fit_whitening, que_scores, rocauc
from .robust_mean import EstimatorConfig, estimate_mean_pipeline
from .synthetic import ADVERSARIES, CorruptionSpec, gen_eps_corrupted, gen_synthetic

PLANTED = "directional_mixture"


@dataclass
class RunRecord:
    """One experiment run: config, seed, metrics and per-phase timings."""

    config: dict
    seed: Optional[int]
    metrics: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunRecord":
        return cls(**json.loads(text))


def _gen(args, parser):
    if args.seed is None:
        parser.error("gen requires --seed")
    if args.adversary == PLANTED:
        data, labels, _ = gen_synthetic(args.d, args.n, CorruptionSpec(eps=args.eps, k=args.k), rng=args.seed)
    else:
        data, labels, _ = gen_eps_corrupted(args.d, args.n, args.eps, args.adversary, rng=args.seed, k=args.k)
    formats.save_dataset(data, args.out)
    if args.labels_out:
        formats.save_labels(labels, args.labels_out)
    return 0


def _estimate(args, parser):
    if args.json_out and args.seed is None:
        parser.error("--json-out requires --seed")
    data = formats.load_dataset(args.input)
    cfg = EstimatorConfig(eps=args.eps, delta=args.delta, mode=args.mode, oracle=args.oracle, seed=args.seed)
    res = estimate_mean_pipeline(data, cfg)
    print("mu_hat: " + " ".join(repr(float(v)) for v in res.mu_hat))
    lams = ", ".join(f"{v:.4g}" for v in res.trace.lambda_history)
    print(f"epochs: {len(res.trace.epochs)}  iterations: {res.trace.total_iterations}  "
          f"retained: {res.retained_count}/{data.n}  lambda: [{lams}]")
    if args.json_out:
        with open(args.json_out, "w") as fh:
            fh.write(res.to_json())
    return 0


def _parse_whiten(spec: str):
    if spec == "none":
        return None, None
    if spec == "exact":
        return "exact", None
    if spec.startswith("topk:"):
        try:
            return "topk", int(spec.split(":", 1)[1])
        except ValueError:
            pass
    raise ConfigError(f"--whiten must be none, exact or topk:<k>, got {spec!r}")


def _score(args, parser):
    data = formats.load_dataset(args.input)
    kind, k = _parse_whiten(args.whiten)
    if kind is not None:
        if not args.whiten_ref:
            parser.error("--whiten exact/topk needs --whiten-ref")
        ref = formats.load_dataset(args.whiten_ref)
        data = apply_whitening(fit_whitening(ref, kind, k=k, power=args.whiten_power), data)
    if args.method == "que":
        tau = que_scores(data, args.alpha, mode="approx" if args.approx else "exact", rng=args.seed)
    elif args.method == "l2":
        tau = baseline_l2(data)
    else:
        tau = baseline_spectral(data, rng=args.seed)
    text = formats.save_scores(tau, args.out)
    if not args.out:
        sys.stdout.write(text)
    return 0


def _eval(args, parser):
    tau = formats.load_scores(args.scores)
    labels = formats.load_labels(args.labels)
    print(repr(rocauc(tau, labels, ties=args.ties)))
    return 0


def _bench(args, parser):
    ns = sorted(set(args.n_list))
    print("n,median_seconds,min_seconds,max_seconds")
    for n in ns:
        data, _, _ = gen_eps_corrupted(args.d, n, args.eps, "directional", rng=args.seed)
        cfg = EstimatorConfig(eps=args.eps, oracle=args.oracle, seed=args.seed)
        times = []
        for _ in range(args.repeats):
            start = time.perf_counter()
            estimate_mean_pipeline(data, cfg)
            times.append(time.perf_counter() - start)
        print(f"{n},{statistics.median(times):.6f},{min(times):.6f},{max(times):.6f}", flush=True)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="quefilter", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a synthetic corrupted dataset")
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--eps", type=float, default=0.1)
    g.add_argument("--k", type=int, default=1)
    g.add_argument("--adversary", choices=(PLANTED,) + ADVERSARIES, default=PLANTED)
    g.add_argument("--seed", type=int)
    g.add_argument("--out", required=True, help=".bin/.qued for binary, anything else for CSV")
    g.add_argument("--labels-out")
    g.set_defaults(func=_gen)

    e = sub.add_parser("estimate", help="robust mean of a dataset")
    e.add_argument("--input", required=True)
    e.add_argument("--mode", choices=("bounded-cov", "subgaussian"), default="bounded-cov")
    e.add_argument("--eps", type=float, default=0.1)
    e.add_argument("--delta", type=float, default=0.1)
    e.add_argument("--oracle", choices=("exact", "sketched"), default="sketched")
    e.add_argument("--seed", type=int)
    e.add_argument("--json-out")
    e.set_defaults(func=_estimate)

    s = sub.add_parser("score", help="per-sample outlier scores")
    s.add_argument("--input", required=True)
    s.add_argument("--method", choices=("que", "l2", "spectral"), default="que")
    s.add_argument("--alpha", type=float, default=4.0)
    s.add_argument("--approx", action="store_true", help="Chebyshev + sketch instead of an eigendecomposition")
    s.add_argument("--whiten", default="none", help="none, exact or topk:<k>")
    s.add_argument("--whiten-ref")
    s.add_argument("--whiten-power", choices=("invsqrt", "inv"), default="invsqrt")
    s.add_argument("--seed", type=int)
    s.add_argument("--out")
    s.set_defaults(func=_score)

    v = sub.add_parser("eval", help="ROC-AUC of scores against 0/1 labels")
    v.add_argument("--scores", required=True)
    v.add_argument("--labels", required=True)
    v.add_argument("--ties", choices=("half", "geq"), default="half")
    v.set_defaults(func=_eval)

    b = sub.add_parser("bench", help="pipeline wall time per n (CSV)")
    b.add_argument("--d", type=int, default=64)
    b.add_argument("--n-list", type=int, nargs="+", default=[10000, 20000, 40000])
    b.add_argument("--eps", type=float, default=0.1)
    b.add_argument("--oracle", choices=("exact", "sketched"), default="sketched")
    b.add_argument("--repeats", type=int, default=3)
    b.add_argument("--seed", type=int, default=0)
    b.set_defaults(func=_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (QueError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
