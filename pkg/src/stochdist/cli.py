"""Command line interface.

Exit codes: 0 success, 1 usage or configuration error (including an exact
baseline refusing an instance), 2 invariant or model violation, 3 acceptance
failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import oracles
from .bench import BENCH_HEADER, run_benchmarks
from .engine import ModelViolation, RoundLimitExceeded, TrialError, run_trial
from .graph import GraphError, generate, save
from .harness import (
    ACCEPT_SEED,
    CRITERIA,
    RESULT_HEADER,
    ConfigError,
    ExperimentConfig,
    baseline_sizes,
    build_protocol,
    load_instances,
    paired_masks,
    ratio_report,
    run_acceptance,
)
from .poisson import minimize_ratio, ratio_curve
from .rng import derive_seed
from .stats import MCEstimate

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, EXIT_ACCEPT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _writer(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", newline="", encoding="utf-8"), True


def _emit(path, header, rows):
    fh, close = _writer(path)
    try:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    finally:
        if close:
            fh.close()


def _config(args) -> ExperimentConfig:
    text = Path(args.config).read_text(encoding="utf-8") if args.config else ""
    return ExperimentConfig.from_text(text, args.set)


# --- subcommands ------------------------------------------------------------


def cmd_gen(args) -> int:
    if (args.p is None) == (args.p_range is None):
        raise UsageError("gen: give exactly one of --p and --p-range")
    params = {}
    if args.kind == "random_bipartite":
        params.update(n_left=args.n_left, n_right=args.n_right, density=args.density)
    elif args.kind == "erdos_renyi":
        params.update(n=args.n, density=args.density)
    else:
        params.update(n=args.n)
    p_range = tuple(args.p_range) if args.p_range else None
    out = Path(args.out)
    if args.count > 1:
        out.mkdir(parents=True, exist_ok=True)
    for i in range(args.count):
        seed = args.seed if args.count == 1 else derive_seed(args.seed, "instance", i)
        sg = generate(args.kind, seed=seed, p=args.p, p_range=p_range, **params)
        path = out if args.count == 1 else out / f"{args.kind}-{i}.graph"
        save(sg, path)
        print(f"wrote {path} (n={sg.n}, m={sg.m})", file=sys.stderr)
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _config(args)
    rows = ratio_report(cfg)
    _emit(args.out or cfg.output, RESULT_HEADER, (dataclasses.astuple(r) for r in rows))
    if args.trace:
        if cfg.algorithm.startswith("oracle-"):
            raise UsageError("run: oracle pseudo-algorithms have no trace")
        name, sg = load_instances(cfg)[0]
        proto, _ = build_protocol(cfg, sg)
        _, _, tr = run_trial(sg, proto, derive_seed(cfg.seed, "trials", 0), 0, max_rounds=cfg.max_rounds)
        doc = {"instance": name, "algorithm": cfg.algorithm, "trial": 0, **tr.to_dict()}
        Path(args.trace).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_oracle(args) -> int:
    cfg = _config(args)
    out = []
    header = ("instance", "problem", "mean", "stderr", "trials")
    for name, sg in load_instances(cfg):
        g = sg.graph
        if args.problem == "cond-f":
            header = ("instance", "edge", "v", "u", "f_vu", "stderr")
            est = oracles.estimate_conditional_f(sg, cfg.f_trials, derive_seed(cfg.seed, "condf", 0))
            out.extend((name, *r) for r in est.rows(g))
            continue
        if args.problem == "marginals":
            header = ("instance", "edge", "u", "v", "freq", "stderr")
            mm = oracles.estimate_match_marginals(sg, cfg.trials, derive_seed(cfg.seed, "trials", 0))
            out.extend((name, *r) for r in mm.rows_edges(g))
            continue
        masks = paired_masks(sg, derive_seed(cfg.seed, "trials", 0), cfg.trials)
        if args.problem == "frac-vc":
            vals = oracles.fractional_vc_totals(g, masks)
        else:
            vals = baseline_sizes(args.problem, "exact", sg, masks)
        est = MCEstimate.from_samples(vals)
        out.append((name, args.problem, est.mean, est.stderr, est.trials))
    _emit(args.out, header, out)
    return EXIT_OK


def cmd_poisson(args) -> int:
    if args.min:
        mn = minimize_ratio()
        print(f"lambda={mn.lam:.7f}")
        print(f"ratio={mn.ratio:.9f} (1/{1 / mn.ratio:.6f})")
        return EXIT_OK
    if args.points < 1 or args.lam_max <= 0:
        raise UsageError("poisson: --points must be positive and --lam-max > 0")
    grid = np.linspace(args.lam_max / args.points, args.lam_max, args.points)
    c = ratio_curve(grid)
    _emit(args.out, ("lambda", "ratio"), ((repr(float(a)), repr(float(b))) for a, b in zip(c.lam, c.ratio)))
    return EXIT_OK


def cmd_accept(args) -> int:
    only = None
    if args.only:
        try:
            only = [int(x) for x in args.only.split(",")]
        except ValueError:
            raise UsageError(f"accept: --only takes comma-separated integers, got {args.only!r}") from None
        unknown = [k for k in only if k not in CRITERIA]
        if unknown:
            raise UsageError(f"accept: unknown criteria {unknown}")
    res = run_acceptance(only, seed=args.seed, echo=lambda s: print(s, flush=True))
    failed = [r.number for r in res if not r.passed]
    print(f"{len(res) - len(failed)}/{len(res)} criteria passed")
    return EXIT_ACCEPT if failed else EXIT_OK


def cmd_bench(args) -> int:
    rows = run_benchmarks(args.n, args.batch, args.seed)
    _emit(args.out, BENCH_HEADER, (dataclasses.astuple(r) for r in rows))
    if not all(r.identical for r in rows):
        print("backends disagree", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="stochdist", description="Distributed algorithms on stochastic graphs.")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    g = sub.add_parser("gen", help="write random graph files")
    g.add_argument("--kind", default="erdos_renyi", choices=["erdos_renyi", "random_bipartite", "star", "path", "complete"])
    g.add_argument("--n", type=int, default=20)
    g.add_argument("--n-left", type=int, default=10)
    g.add_argument("--n-right", type=int, default=10)
    g.add_argument("--density", type=float, default=0.2)
    g.add_argument("--p", type=float)
    g.add_argument("--p-range", type=float, nargs=2, metavar=("LO", "HI"))
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--out", required=True, help="file, or directory when --count > 1")
    g.set_defaults(fn=cmd_gen)

    def cfg_args(p):
        p.add_argument("--config", help="key=value config file")
        p.add_argument("set", nargs="*", metavar="key=value", help="config overrides")
        p.add_argument("--out", help="CSV output (default stdout)")

    r = sub.add_parser("run", help="run one algorithm and emit result rows")
    cfg_args(r)
    r.add_argument("--trace", help="write the JSON trace of trial 0 here")
    r.set_defaults(fn=cmd_run)

    o = sub.add_parser("oracle", help="exact or Monte-Carlo baselines")
    cfg_args(o)
    o.add_argument("--problem", required=True, choices=["vc", "frac-vc", "matching", "mds", "cond-f", "marginals"])
    o.set_defaults(fn=cmd_oracle)

    p = sub.add_parser("poisson", help="ratio curve or its minimum")
    p.add_argument("--min", action="store_true")
    p.add_argument("--points", type=int, default=1000)
    p.add_argument("--lam-max", type=float, default=20.0)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_poisson)

    a = sub.add_parser("accept", help="run the acceptance suite")
    a.add_argument("--only", help="comma-separated criterion numbers")
    a.add_argument("--seed", type=int, default=ACCEPT_SEED)
    a.set_defaults(fn=cmd_accept)

    b = sub.add_parser("bench", help="kernel throughput per backend")
    b.add_argument("--n", type=int, default=60)
    b.add_argument("--batch", type=int, default=200)
    b.add_argument("--seed", type=int, default=1)
    b.add_argument("--out")
    b.set_defaults(fn=cmd_bench)
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if not getattr(args, "fn", None):
            raise UsageError("choose a subcommand: gen, run, oracle, poisson, accept, bench")
        return args.fn(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, GraphError, oracles.OracleBudgetError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ModelViolation, RoundLimitExceeded, TrialError, AssertionError, ArithmeticError) as exc:
        print(f"violation: {exc}", file=sys.stderr)
        return EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
