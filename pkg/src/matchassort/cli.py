"""Command line entry point: ``gen``, ``eval``, ``run`` and ``bench``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import FAMILIES, BenchConfig, GenSpec, generate, write_csv
from .concave import FwConfig, algorithm4, algorithm5
from .core import dumps, instance_to_json, load_family, load_instance, validate
from .evaluate import evaluate, expected_revenue_exact, sandwich, simulate
from .lpround.algorithms import algorithm2, algorithm3, solve_relaxation, split_combine
from .submodwelfare import algorithm1

RUN_ALGORITHMS = ("alg1-greedy", "alg1-cg", "alg2", "alg3", "alg4", "alg5", "split")


def _load_checked(path: str):
    inst = load_instance(path)
    errs = validate(inst)
    if errs:
        raise SystemExit("invalid instance:\n  " + "\n  ".join(errs))
    return inst


def cmd_gen(args) -> int:
    spec = GenSpec(args.family, args.n, args.m, args.lambda_v, args.lambda_0, args.k, args.seed)
    text = dumps(instance_to_json(generate(spec)))
    if args.output:
        Path(args.output).write_text(text)
    else:
        print(text)
    return 0


def cmd_eval(args) -> int:
    inst = _load_checked(args.instance)
    fam = load_family(args.family)
    if not fam.is_feasible(inst):
        raise SystemExit("family is infeasible for this instance")
    if args.mode == "exact":
        res = expected_revenue_exact(inst, fam)
    else:
        res = simulate(inst, fam, args.trials, args.seed)
    sw = sandwich(inst, fam)
    print(json.dumps({**res.to_json(), "sandwich": {"lower": sw.lower, "upper": sw.upper, "q_min": sw.q_min}}))
    return 0


def cmd_run(args) -> int:
    inst = _load_checked(args.instance)
    fw = FwConfig(args.fw_iters, args.fw_tol)
    alg = args.alg
    if alg == "alg1-greedy":
        fam = algorithm1(inst, "greedy", args.seed)
    elif alg == "alg1-cg":
        fam = algorithm1(inst, "continuous", args.seed)
    elif alg in ("alg2", "alg3"):
        rel = solve_relaxation(inst, alg == "alg3", lp_dump=args.lp_dump)
        fam = (algorithm2 if alg == "alg2" else algorithm3)(inst, args.seed, rel)
    elif alg == "alg4":
        fam = algorithm4(inst, fw, args.seed)
    elif alg == "alg5":
        fam = algorithm5(inst, fw, args.seed)
    else:
        fam = split_combine(inst, args.seed)
    if not fam.is_feasible(inst):
        print(f"warning: {alg} ignores the budgets; the family exceeds some K_i", file=sys.stderr)
    res = evaluate(inst, fam, args.trials, args.seed)
    text = json.dumps(fam.to_json())
    if args.output:
        Path(args.output).write_text(text + "\n")
    else:
        print(text)
    print(json.dumps({"algorithm": alg, **res.to_json()}))
    return 0


def cmd_bench(args) -> int:
    cfg = BenchConfig.load(args.config)
    progress = (lambda msg: print(msg, file=sys.stderr)) if args.verbose else None
    rows = cfg.run(progress)
    write_csv(rows, args.output, timing=not args.no_timing)
    for row in rows:
        if row.error:
            print(f"{row.family} n={row.n} {row.algorithm}: {row.error}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="matchassort", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a random instance")
    g.add_argument("--family", choices=FAMILIES, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--lambda-v", type=float, default=1.0)
    g.add_argument("--lambda-0", type=float, default=1.0)
    g.add_argument("--k", type=int, default=None)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    e = sub.add_parser("eval", help="expected revenue of a family")
    e.add_argument("--instance", required=True)
    e.add_argument("--family", required=True)
    e.add_argument("--mode", choices=("exact", "mc"), default="exact")
    e.add_argument("--trials", type=int, default=100_000)
    e.add_argument("--seed", type=int, default=0)
    e.set_defaults(func=cmd_eval)

    r = sub.add_parser("run", help="run an algorithm and evaluate its output")
    r.add_argument("--instance", required=True)
    r.add_argument("--alg", choices=RUN_ALGORITHMS, required=True)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--trials", type=int, default=1000, help="Monte Carlo trials when exact evaluation is infeasible")
    r.add_argument("--lp-dump", help="write the LP (alg2/alg3) in text row format")
    r.add_argument("--fw-iters", type=int, default=500)
    r.add_argument("--fw-tol", type=float, default=1e-6)
    r.add_argument("-o", "--output", help="family JSON output path")
    r.set_defaults(func=cmd_run)

    b = sub.add_parser("bench", help="run a benchmark config and write CSV")
    b.add_argument("--config", required=True)
    b.add_argument("-o", "--output", required=True)
    b.add_argument("--no-timing", action="store_true", help="leave cpu_s empty so reruns are byte-identical")
    b.add_argument("-v", "--verbose", action="store_true")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
