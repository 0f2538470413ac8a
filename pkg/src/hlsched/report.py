"""Run configurations and the schedule / compare / allocate / partition reports.

Each ``run_*`` function returns a plain dict; :func:`render` turns it into
aligned text or JSON.  Runtime is reported under ``runtime_ms`` and is the
only field that changes between identical runs.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from .allocation import allocation_report
from .dfg import UNIT, Dfg, LatencyModel, OpKind, critical_path_length, load_fixture, parse_dfg, random_dag
from .errors import HlsError, ParseError
from .partition import (
    CostModel,
    partition_by_clique,
    partition_by_cycles,
    partition_metrics,
    partition_to_dict,
)
from .saa import saa
from .schedule import (
    ResourceConstraints,
    Schedule,
    alap,
    asap,
    check_schedule,
    fdls,
    fds,
    fu_usage,
    list_schedule,
    mbs,
    schedule_to_dict,
)

ALGORITHMS = ("asap", "alap", "mbs", "ls", "fds", "fdls", "saa")
STRATEGIES = ("cycles", "clique")


@dataclass(frozen=True)
class RunConfig:
    input: str = "ewf"
    algorithm: str = "mbs"
    resources: dict[OpKind, int] = field(default_factory=dict)
    latency: dict[OpKind, int] = field(default_factory=dict)
    deadline: int | None = None
    format: str = "table"
    seed: int | None = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; choose from {', '.join(ALGORITHMS)}")
        if self.format not in ("table", "json"):
            raise ValueError(f"unknown format {self.format!r}")
        for kind, n in self.resources.items():
            if n < 1:
                raise ValueError(f"--{kind.value} must be >= 1")

    @property
    def rc(self) -> ResourceConstraints:
        return ResourceConstraints(self.resources)

    @property
    def lat(self) -> LatencyModel:
        return LatencyModel(self.latency) if self.latency else UNIT


def load_input(source: str, seed: int | None = None) -> Dfg:
    """Resolve ``--input``: a fixture name, ``random:N``, or a JSON file path."""
    if source in ("ewf", "chain4", "diamond"):
        return load_fixture(source)
    if source.startswith("random:"):
        try:
            n = int(source.split(":", 1)[1])
        except ValueError:
            raise ParseError(f"bad random graph size in {source!r}", "--input") from None
        if not 1 <= n <= 500:
            raise ParseError("random graph size must be in 1..500", "--input")
        return random_dag(n, seed)
    try:
        text = Path(source).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(str(exc), source) from None
    return parse_dfg(text)


def _verified(dfg: Dfg, sched: Schedule, lat: LatencyModel, rc: ResourceConstraints | None):
    problems = check_schedule(dfg, sched, lat, rc)
    if problems:
        raise HlsError(f"internal error, {sched.algorithm} schedule invalid: {problems[0]}")
    return sched


def _schedule(dfg: Dfg, cfg: RunConfig, algorithm: str, constrained_baselines: bool = False):
    """Run one algorithm; returns (scheduled graph, schedule, saa result or None)."""
    lat, rc = cfg.lat, cfg.rc
    if algorithm in ("asap", "alap") and constrained_baselines and rc.limits:
        sched = list_schedule(dfg, lat, rc, algorithm, algorithm=algorithm)
        return dfg, _verified(dfg, sched, lat, rc), None
    if algorithm == "asap":
        return dfg, _verified(dfg, asap(dfg, lat), lat, None), None
    if algorithm == "alap":
        return dfg, _verified(dfg, alap(dfg, lat, cfg.deadline), lat, None), None
    if algorithm == "fds":
        sched, _ = fds(dfg, lat, cfg.deadline)
        return dfg, _verified(dfg, sched, lat, None), None
    if algorithm == "saa":
        res = saa(dfg, lat, rc)
        return res.dfg, _verified(res.dfg, res.schedule, lat, rc), res
    run = {"mbs": mbs, "fdls": fdls}.get(algorithm)
    sched = run(dfg, lat, rc) if run else list_schedule(dfg, lat, rc, "alap", algorithm="ls")
    return dfg, _verified(dfg, sched, lat, rc), None


def run_schedule(cfg: RunConfig) -> dict:
    dfg = load_input(cfg.input, cfg.seed)
    t0 = time.perf_counter()
    graph, sched, res = _schedule(dfg, cfg, cfg.algorithm)
    elapsed = (time.perf_counter() - t0) * 1000
    out = res.to_dict() if res else schedule_to_dict(graph, sched, cfg.lat)
    out["input"] = cfg.input
    out["steps"] = {
        str(s): ops for s, ops in sched.steps(graph, cfg.lat).items()
    }
    out["kinds"] = {n.name: n.op.value for n in graph.nodes}
    out["runtime_ms"] = round(elapsed, 3)
    return out


@dataclass(frozen=True)
class ComparisonRow:
    algorithm: str
    adders: int
    multipliers: int
    steps: int
    fu_total: int
    registers: int
    unconstrained: int
    runtime_ms: float = field(compare=False, default=0.0)

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "add": self.adders,
            "mul": self.multipliers,
            "steps": self.steps,
            "fu_total": self.fu_total,
            "registers": self.registers,
            "unconstrained": self.unconstrained,
            "runtime_ms": self.runtime_ms,
        }


def comparison_rows(dfg: Dfg, cfg: RunConfig, algorithms) -> list[ComparisonRow]:
    """One row per algorithm over the same graph, latencies and budget.

    With a budget given, the asap and alap rows are list schedules using
    ASAP / ALAP start as priority, so every row respects the budget;
    ``unconstrained`` is the critical path of the graph each row scheduled
    (the pure ASAP/ALAP length for those two rows).
    """
    rows = []
    for alg in algorithms:
        t0 = time.perf_counter()
        graph, sched, _ = _schedule(dfg, cfg, alg, constrained_baselines=True)
        report = allocation_report(graph, sched, cfg.lat)
        elapsed = (time.perf_counter() - t0) * 1000
        used = fu_usage(graph, sched, cfg.lat)
        rows.append(
            ComparisonRow(
                alg,
                used.get(OpKind.ADD, 0),
                used.get(OpKind.MUL, 0),
                sched.length,
                report.fu_total,
                report.registers,
                critical_path_length(graph, cfg.lat),
                round(elapsed, 3),
            )
        )
    return rows


def run_compare(cfg: RunConfig, algorithms) -> dict:
    bad = [a for a in algorithms if a not in ALGORITHMS]
    if bad or not algorithms:
        raise ValueError(f"unknown algorithm(s): {', '.join(bad) or '(none)'}")
    dfg = load_input(cfg.input, cfg.seed)
    rows = comparison_rows(dfg, cfg, algorithms)
    return {
        "input": cfg.input,
        "budget": {k.value: v for k, v in sorted(cfg.rc.limits.items())},
        "rows": [r.to_dict() for r in rows],
    }


def run_allocate(cfg: RunConfig) -> dict:
    dfg = load_input(cfg.input, cfg.seed)
    t0 = time.perf_counter()
    graph, sched, _ = _schedule(dfg, cfg, cfg.algorithm)
    out = allocation_report(graph, sched, cfg.lat, cfg.algorithm).to_dict()
    out["input"] = cfg.input
    out["length"] = sched.length
    out["runtime_ms"] = round((time.perf_counter() - t0) * 1000, 3)
    return out


def run_partition(
    cfg: RunConfig, strategy: str = "cycles", cost: CostModel | None = None, threshold: float = 2
) -> dict:
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; choose from {', '.join(STRATEGIES)}")
    cost = cost or CostModel()
    dfg = load_input(cfg.input, cfg.seed)
    t0 = time.perf_counter()
    graph, sched, _ = _schedule(dfg, cfg, cfg.algorithm)
    if strategy == "cycles":
        sides = partition_by_cycles(graph, cost, threshold)
    else:
        sides = partition_by_clique(graph, sched, cost, cfg.lat)
    metrics = partition_metrics(graph, sched, sides, cost, cfg.lat)
    out = partition_to_dict(graph, strategy, sides, metrics)
    out["input"] = cfg.input
    out["algorithm"] = cfg.algorithm
    out["runtime_ms"] = round((time.perf_counter() - t0) * 1000, 3)
    return out


# -- rendering ---------------------------------------------------------------


def _table(header: list[str], rows: list[list]) -> str:
    cells = [header] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    numeric = [all(isinstance(r[i], (int, float)) for r in rows) for i in range(len(header))]
    lines = [
        "  ".join(c.rjust(w) if num else c.ljust(w) for c, w, num in zip(r, widths, numeric))
        for r in cells
    ]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(line.rstrip() for line in lines)


def render_schedule(report: dict) -> str:
    usage = " ".join(f"{k}={v}" for k, v in report["fu_usage"].items())
    head = [
        f"input      {report['input']}",
        f"algorithm  {report['algorithm']}",
        f"length     {report['length']}",
        f"fu_usage   {usage}",
    ]
    if "baseline_length" in report:
        head.append(f"baseline   {report['baseline_length']}")
        cuts = ", ".join(f"{a}->{b}" for a, b in report["transform"]["cuts"]) or "-"
        head.append(f"cuts       {cuts}")
    kinds = list(report["fu_usage"])
    rows = []
    for step, ops in report["steps"].items():
        per_kind = [sum(1 for n in ops if report["kinds"][n] == k) for k in kinds]
        rows.append([int(step), *per_kind, " ".join(ops)])
    body = _table(["step", *kinds, "ops"], rows)
    return "\n".join(head) + "\n\n" + body + f"\n\nruntime_ms {report['runtime_ms']}"


def render_compare(report: dict) -> str:
    header = ["algorithm", "+", "*", "steps", "fu_total", "registers", "unconstrained", "runtime_ms"]
    keys = ["algorithm", "add", "mul", "steps", "fu_total", "registers", "unconstrained", "runtime_ms"]
    budget = " ".join(f"{k}={v}" for k, v in report["budget"].items()) or "unlimited"
    # runtime as text keeps it left-aligned, so only the last column varies between runs
    rows = [[*(r[k] for k in keys[:-1]), f"{r['runtime_ms']:.3f}"] for r in report["rows"]]
    return f"input   {report['input']}\nbudget  {budget}\n\n" + _table(header, rows)


def render_allocate(report: dict) -> str:
    fu = " ".join(f"{k}={v}" for k, v in report["fu"].items())
    conv = report["register_conventions"]
    lines = [
        f"input              {report['input']}",
        f"algorithm          {report['algorithm']}",
        f"length             {report['length']}",
        f"fu                 {fu}",
        f"fu_total           {report['fu_total']}",
        f"registers          {report['registers']}",
        f"registers_clique   {report['registers_clique']}",
        "conventions        " + " ".join(f"{k}={v}" for k, v in conv.items()),
        "",
        _table(
            ["value", "register", "unit"],
            [
                [n, f"r{r}", report["bindings"]["units"].get(n, "-")]
                for n, r in report["bindings"]["registers"].items()
            ],
        ),
        "",
        f"runtime_ms {report['runtime_ms']}",
    ]
    return "\n".join(lines)


def render_partition(report: dict) -> str:
    keys = ["strategy", "algorithm", "edge_cut", "buffer_peak", "buffer_total", "delay", "comm_cost"]
    lines = [f"input         {report['input']}"]
    lines += [f"{k:<13} {report[k]}" for k in keys]
    for side in ("hw", "sw"):
        members = [n for n, s in report["sides"].items() if s == side]
        lines.append(f"{side:<13} {' '.join(members) or '-'}")
    lines.append(f"runtime_ms    {report['runtime_ms']}")
    return "\n".join(lines)


def render(kind: str, report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps({k: v for k, v in report.items() if k != "kinds"}, indent=2)
    return {
        "schedule": render_schedule,
        "compare": render_compare,
        "allocate": render_allocate,
        "partition": render_partition,
    }[kind](report)
