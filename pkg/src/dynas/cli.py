"""Command-line entry point: ``dynas <command> [options]``.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .config import ConfigError
from .harness import (DEFAULT_BUDGET, DEFAULT_SEGMENT_RUNS, PC_GRID, DataError, ExperimentConfig,
                      cmd_benchmark, cmd_predict, cmd_report, cmd_segment_study,
                      cmd_validate)
from .prediction import InsufficientData, NoFeasiblePolicy
from .problems import ProblemError
from .runlog import LogError
from .switching import PolicyError

EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _experiment_flags(p: argparse.ArgumentParser, *, search: bool = False) -> None:
    p.add_argument("--config", help="JSON experiment file; flags given here override it")
    p.add_argument("--func", type=int, nargs="+", help="function ids, e.g. --func 1 2 7")
    p.add_argument("--dim", type=int, help="problem dimension (default 100)")
    p.add_argument("--target", type=float, help="final target for every --func (default: built-in table)")
    p.add_argument("--runs", type=int, help="independent runs per algorithm/policy")
    p.add_argument("--budget", type=int, help="evaluation budget per run")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--out", help="output directory")
    p.add_argument("--algo", action="append", metavar="NAME",
                   help="canonical algorithm name; repeat to build a portfolio (default: all 80)")
    p.add_argument("--jobs", type=int, help="worker threads")
    if search:
        p.add_argument("--ps-min", type=float, help="success-rate filter (default 0.8)")
        p.add_argument("--top-k", type=int, help="number of ranked policies kept (default 100)")
        p.add_argument("--cap", type=int, help="max uses of one algorithm as A1 and as A2")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dynas", description="Switch-once dynamic algorithm selection for GAs "
                                               "on pseudo-Boolean problems.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("benchmark", help="run static GAs and write run logs")
    _experiment_flags(p)

    p = sub.add_parser("segment-study", help="LeadingOnes cost per segment and crossover probability")
    p.add_argument("--dim", type=int, default=100)
    p.add_argument("--segment", type=int, default=5)
    p.add_argument("--pc", type=float, nargs="+", default=list(PC_GRID), help="crossover probabilities")
    p.add_argument("--runs", type=int, default=DEFAULT_SEGMENT_RUNS)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="out")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("predict", help="rank switch policies from benchmark data")
    p.add_argument("--data", required=True, help="directory with run logs")
    _experiment_flags(p, search=True)

    p = sub.add_parser("validate", help="run switch policies and compare with predictions")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--policies", help="policies.json written by predict")
    src.add_argument("--policy-file", help="schedule file, one '<threshold> <algorithm>' per line")
    _experiment_flags(p)

    p = sub.add_parser("report", help="ERT table and fixed-target plots from run logs")
    p.add_argument("--data", required=True, help="directory with run logs")
    p.add_argument("--limit", type=int, default=10, help="algorithms per plot")
    _experiment_flags(p)
    return parser


def experiment_from_args(args, *, need_problems: bool = True) -> ExperimentConfig:
    base = {}
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                base = json.load(fh)
        except OSError as exc:
            raise UsageError(f"cannot read config {args.config}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"{args.config}: invalid JSON ({exc})") from None
    if args.func:
        dim = args.dim or 100
        base["problems"] = [[f, dim, args.target] for f in args.func]
    elif args.dim or args.target is not None:
        if not base.get("problems"):
            raise UsageError("--dim/--target need --func")
        base["problems"] = [[p[0] if isinstance(p, list) else p["func_id"], args.dim or
                             (p[1] if isinstance(p, list) else p["dim"]), args.target]
                            for p in base["problems"]]
    if need_problems and not base.get("problems"):
        raise UsageError("no problems: give --func or a --config with 'problems'")
    base.setdefault("problems", [])
    for flag, key in [("runs", "runs"), ("budget", "budget"), ("seed", "master_seed"),
                      ("out", "output_dir"), ("algo", "algorithms"), ("jobs", "jobs"),
                      ("ps_min", "ps_min"), ("top_k", "top_k"), ("cap", "per_alg_cap")]:
        value = getattr(args, flag, None)
        if value is not None:
            base[key] = value
    return ExperimentConfig.from_dict(base)


def _run(args) -> None:
    if args.command == "segment-study":
        results = cmd_segment_study(args.out, args.dim, args.segment, args.pc, args.runs,
                                    args.seed, args.budget, args.jobs)
        print(f"wrote {len(results)} cells to {args.out}/segment_study.csv")
        return
    exp = experiment_from_args(args)
    if args.command == "benchmark":
        root = cmd_benchmark(exp)
        print(f"wrote {len(exp.configs) * len(exp.problems)} batches under {root}/data")
    elif args.command == "predict":
        doc = cmd_predict(args.data, exp)
        for entry in doc["problems"]:
            if entry["error"]:
                print(f"F{entry['func_id']} d{entry['dim']}: {entry['error']}")
            else:
                best = entry["policies"][0]
                print(f"F{entry['func_id']} d{entry['dim']} target {entry['final_target']}: "
                      f"BSA {entry['bsa']} sERT {entry['sert']:.1f}; best policy "
                      f"{best['A1']} -> {best['A2']} at {best['phi_s']:g}, "
                      f"dERT {best['predicted_ert']:.1f}")
    elif args.command == "validate":
        results = cmd_validate(exp, args.policies, args.policy_file)
        for r in results:
            print(f"F{r.func_id} #{r.rank} {r.policy}: measured ERT {r.measured_ert:.1f} "
                  f"(ps {r.ps:.2f}), relative deviation {r.relative_deviation:+.3f}")
    elif args.command == "report":
        table = cmd_report(args.data, exp, limit=args.limit)
        print(f"wrote {len(table)} ERT entries to {exp.output_dir}/ert_table.csv")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return int(exc.code or 0)
    try:
        _run(args)
    except (DataError, LogError, PolicyError, InsufficientData, NoFeasiblePolicy,
            FileNotFoundError) as exc:
        print(f"dynas: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (UsageError, ConfigError, ProblemError, ValueError) as exc:
        print(f"dynas: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return 0


if __name__ == "__main__":
    sys.exit(main())
