"""``hlsched`` command line.

Exit codes: 0 success, 1 input or usage error, 2 infeasible deadline.
"""

from __future__ import annotations

import argparse
import math
import sys

from .dfg import OpKind
from .errors import HlsError, InfeasibleDeadline
from .partition import CostModel
from .report import ALGORITHMS, STRATEGIES, RunConfig, render, run_allocate, run_compare, run_partition, run_schedule


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _kind_counts(text: str) -> dict[OpKind, int]:
    """Parse ``add=1,mul=2``."""
    out = {}
    for item in filter(None, text.split(",")):
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"expected kind=value, got {item!r}")
        try:
            out[OpKind(key.strip())] = int(value)
        except ValueError:
            raise UsageError(f"bad entry {item!r}") from None
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hlsched", description="HLS scheduling, allocation and partitioning.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = _Parser(add_help=False)
    common.add_argument("--input", default="ewf", help="ewf, chain4, diamond, random:N or a DFG JSON file")
    common.add_argument("--add", type=int, help="adder budget")
    common.add_argument("--mul", type=int, help="multiplier budget")
    common.add_argument("--sub", type=int, help="subtracter budget")
    common.add_argument("--latency", default="", help="per-kind cycles, e.g. add=1,mul=2")
    common.add_argument("--deadline", type=int, help="step budget for alap and fds")
    common.add_argument("--format", choices=("table", "json"), default="table")
    common.add_argument("--seed", type=int, help="seed for --input random:N")

    for name in ("schedule", "allocate", "partition"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("--alg", choices=ALGORITHMS, default="mbs")
        if name == "partition":
            p.add_argument("--strategy", choices=STRATEGIES, default="cycles")
            p.add_argument("--threshold", type=float, default=2.0, help="software cycles that send an op to hardware")
            p.add_argument("--sw", default="", help="software cycles, e.g. add=1,mul=4")
            p.add_argument("--hw", default="", help="hardware cycles, e.g. mul=1")
            p.add_argument("--transfer", type=int, default=1, help="cycles per crossing value")
    p = sub.add_parser("compare", parents=[common])
    p.add_argument("--algs", default="asap,alap,mbs,saa", help="comma-separated algorithms")
    return parser


def _config(args, algorithm: str) -> RunConfig:
    resources = {
        OpKind(k): v for k in ("add", "mul", "sub") if (v := getattr(args, k)) is not None
    }
    return RunConfig(
        input=args.input,
        algorithm=algorithm,
        resources=resources,
        latency=_kind_counts(args.latency),
        deadline=args.deadline,
        format=args.format,
        seed=args.seed,
    )


def _run(args) -> str:
    if args.command == "compare":
        algs = [a.strip() for a in args.algs.split(",") if a.strip()]
        bad = [a for a in algs if a not in ALGORITHMS]
        if bad or not algs:
            raise UsageError(f"unknown algorithm(s) in --algs: {', '.join(bad) or '(none)'}")
        cfg = _config(args, "mbs")
        return render("compare", run_compare(cfg, algs), cfg.format)
    cfg = _config(args, args.alg)
    if args.command == "schedule":
        return render("schedule", run_schedule(cfg), cfg.format)
    if args.command == "allocate":
        return render("allocate", run_allocate(cfg), cfg.format)
    sw = {OpKind.MUL: 4, **_kind_counts(args.sw)}
    cost = CostModel(sw, _kind_counts(args.hw), args.transfer)
    threshold = math.inf if math.isnan(args.threshold) else args.threshold
    return render("partition", run_partition(cfg, args.strategy, cost, threshold), cfg.format)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        print(_run(args))
    except InfeasibleDeadline as exc:
        print(f"hlsched: infeasible: {exc}", file=sys.stderr)
        return 2
    except (UsageError, HlsError, ValueError, KeyError) as exc:
        print(f"hlsched: error: {str(exc).splitlines()[0] if str(exc) else type(exc).__name__}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
