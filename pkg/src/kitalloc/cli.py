"""Command-line entry point: ``kitalloc simulate|compare|pool-analyze``."""
import argparse
import json
import sys

from .config import load_config
from .errors import ConfigError
from .pooling import PoolStrategy, effective_budget, expected_tests_per_person
from .simulator import compare_strategies, emit_report, report_to_dict, run_simulation


def _simulate(args):
    cfg = load_config(args.config, seed=args.seed)
    report = run_simulation(cfg)
    if args.out:
        emit_report(report, args.format, args.out)
    else:
        print(json.dumps(report_to_dict(report)["summary"], indent=2))
    return 0


def _compare(args):
    cfg = load_config(args.config, seed=args.seed)
    names = [s.strip() for s in args.strategies.split(",") if s.strip()]
    table = compare_strategies(cfg, names, args.replicates, workers=args.workers)
    print(table.format())
    if args.out:
        with open(args.out, "w") as fh:
            json.dump({"replicates": table.replicates, "rows": table.rows(), "values": table.values}, fh, indent=2)
    return 0


def _pool_analyze(args):
    per_person = expected_tests_per_person(args.size, args.p, args.strategy)
    print(f"strategy={args.strategy} size={args.size} prevalence={args.p}")
    print(f"expected tests per person: {per_person:.6f}")
    print(f"expected tests per pool:   {per_person * args.size:.6f}")
    if args.kits is not None:
        print(f"people testable with {args.kits} kits (expected): "
              f"{effective_budget(args.kits, args.size, args.p, args.strategy)}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="kitalloc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one simulation")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.set_defaults(func=_simulate)

    p = sub.add_parser("compare", help="paired comparison of strategies")
    p.add_argument("--config", required=True)
    p.add_argument("--strategies", required=True, help="comma separated strategy names")
    p.add_argument("--replicates", type=int, default=10)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=_compare)

    p = sub.add_parser("pool-analyze", help="expected cost of pooled testing")
    p.add_argument("--p", type=float, required=True, help="prevalence")
    p.add_argument("--size", type=int, default=5)
    p.add_argument("--strategy", choices=[s.value for s in PoolStrategy], default="dorfman")
    p.add_argument("--kits", type=int)
    p.set_defaults(func=_pool_analyze)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
