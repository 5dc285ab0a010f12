"""Command-line front end: ``critgraph <subcommand> [options]``.

Exit codes: 0 when every declared check passes, 1 when a check fails, 2 on
usage or configuration errors.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import experiments, graphgen, graphstats, kernels, limits, spectral, stats
from .errors import CritGraphError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _emit(text: str, out_dir: str | None, name: str) -> None:
    if out_dir is None:
        sys.stdout.write(text)
        return
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, name), "w", newline="\n") as fh:
        fh.write(text)


def _read(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise CritGraphError(f"cannot read {path}: {exc.strerror}") from None


def _kernel(args) -> kernels.KernelSpec:
    if args.kernel:
        return kernels.KernelSpec.from_text(_read(args.kernel))
    return kernels.KernelSpec(args.family, a=args.a, eta=args.eta, c=args.c)


def cmd_gen(args) -> int:
    if args.model == "rank-one":
        x = np.full(args.n, args.n ** (-2 / 3))
        g = graphgen.sample_rank_one(x, args.n ** (1 / 3) + args.lam, seed=args.seed)
    elif args.model == "rgiv":
        g = graphgen.sample_rgiv(args.n, args.lam, seed=args.seed)
    else:
        W = _kernel(args)
        seed = args.seed if args.scheme in kernels.RANDOM_SCHEMES else None
        weights = experiments.critical_weights(W, args.lam, args.n, args.scheme, seed)
        g = graphgen.sample_graphon_graph(weights, args.rule, seed=args.seed)
    _emit(g.to_csv(), args.out, "graph.csv")
    return EXIT_OK


def cmd_stats(args) -> int:
    g = graphgen.Graph.from_csv(_read(args.graph))
    _emit(graphstats.stats_csv(g), args.out, "components.csv")
    return EXIT_OK


def cmd_spectral(args) -> int:
    W = _kernel(args)
    n = args.n
    x = experiments.grid_points(n)
    K = np.array(kernels.eval_kernel(W, x[:, None], x[None, :], cap=n ** (2 / 3))) * np.ones((n, n))
    np.fill_diagonal(K, 0.0)
    s = spectral.leading_eigenpair(K)
    c = spectral.limit_constants(s, args.lam * K)
    obj = json.loads(s.to_json())
    obj.update({"alpha": c.alpha, "chi": c.chi, "zeta": c.zeta, "residual": s.residual, "iterations": s.iterations})
    _emit(json.dumps(obj) + "\n", args.out, "spectral.json")
    return EXIT_OK


def cmd_limit(args) -> int:
    s = limits.sample_limit_sizes(args.lam, args.T, args.dt, seed=args.seed)
    _emit(s.to_csv(), args.out, "limit.csv")
    return EXIT_OK


def cmd_experiment(args) -> int:
    if not args.config:
        raise CritGraphError("experiment: --config is required")
    cfg = experiments.parse_config(_read(args.config))
    if args.seed is not None:
        cfg.master_seed = args.seed
    if args.out is not None:
        cfg.out = args.out
    cfg.threads = args.threads
    table = experiments.run_experiment(cfg)
    if cfg.out is None:
        sys.stdout.write(table.summary_json())
    for c in table.checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name} statistic={c.statistic:.6g} ({c.threshold})", file=sys.stderr)
    return EXIT_OK if table.passed else EXIT_FAIL


def _sample_file(path: str, column: str | None) -> np.ndarray:
    lines = [ln for ln in _read(path).splitlines() if ln.strip() and not ln.startswith("#")]
    head = lines[0].split(",")
    try:
        [float(v) for v in head]
        body, idx = lines, 0
    except ValueError:
        body = lines[1:]
        idx = head.index(column) if column else 0
    return np.array([float(ln.split(",")[idx]) for ln in body])


def cmd_compare(args) -> int:
    a = _sample_file(args.a, args.column)
    b = _sample_file(args.b, args.column)
    D, p = stats.ks_statistic(a, b)
    ok = p > args.threshold
    _emit(json.dumps({"ks_D": D, "ks_p": p, "threshold": args.threshold, "passed": ok}) + "\n", args.out, "compare.json")
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="master seed (u64)")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker processes")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output directory (stdout if omitted)")
    common.add_argument("--config", default=argparse.SUPPRESS, help="config file (key=value or JSON)")

    p = argparse.ArgumentParser(prog="critgraph", description=__doc__.splitlines()[0], parents=[common])
    sub = p.add_subparsers(dest="command", required=True)

    def kernel_opts(sp):
        sp.add_argument("--kernel", help="kernel spec file (family=..., c=...)")
        sp.add_argument("--family", default="constant", choices=kernels.FAMILIES)
        sp.add_argument("--a", type=float, default=0.0)
        sp.add_argument("--eta", type=float, default=0.0)
        sp.add_argument("--c", type=float, default=1.0)

    g = sub.add_parser("gen", parents=[common], help="sample a graph as an edge-list CSV")
    g.add_argument("--model", choices=("graphon", "rank-one", "rgiv"), default="graphon")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--lambda", dest="lam", type=float, default=0.0)
    g.add_argument("--scheme", default="grid", choices=("grid", "uniform-order-stat", "cell-average"))
    g.add_argument("--rule", default="capped", choices=("capped", "exponential"))
    kernel_opts(g)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("stats", parents=[common], help="component statistics of an edge-list CSV")
    s.add_argument("graph")
    s.set_defaults(func=cmd_stats)

    sp = sub.add_parser("spectral", parents=[common], help="Perron eigenpair and limit constants of a kernel")
    sp.add_argument("--n", type=int, default=1000)
    sp.add_argument("--lambda", dest="lam", type=float, default=0.0, help="H = lambda W")
    kernel_opts(sp)
    sp.set_defaults(func=cmd_spectral)

    lm = sub.add_parser("limit", parents=[common], help="excursion lengths of the limit law")
    lm.add_argument("--lambda", dest="lam", type=float, default=0.0)
    lm.add_argument("--T", type=float, default=None)
    lm.add_argument("--dt", type=float, default=1e-4)
    lm.set_defaults(func=cmd_limit)

    ex = sub.add_parser("experiment", parents=[common], help="run a Monte Carlo experiment from --config")
    ex.set_defaults(func=cmd_experiment)

    cp = sub.add_parser("compare", parents=[common], help="two-sample KS test of two sample files")
    cp.add_argument("a")
    cp.add_argument("b")
    cp.add_argument("--column", default=None)
    cp.add_argument("--threshold", type=float, default=1e-3)
    cp.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, default in (("seed", None), ("threads", 1), ("out", None), ("config", None)):
        if not hasattr(args, name):
            setattr(args, name, default)
    if args.seed is not None and not 0 <= args.seed < 2 ** 64:
        parser.error("--seed must be an unsigned 64-bit integer")
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        return args.func(args)
    except CritGraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
