"""Schedulers mapping operations onto control steps.

Control steps are numbered from 1.  An operation started at step ``s`` with
latency ``L`` occupies its functional unit for steps ``s .. s+L-1`` and its
result is usable from step ``s+L`` on.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field

from .dfg import UNIT, Dfg, LatencyModel, NodeClass, OpKind, critical_path_length, topo_order
from .errors import InfeasibleDeadline, NodeSetMismatch, UnschedulableNode


@dataclass(frozen=True, eq=False)
class Schedule:
    start: Mapping[str, int]
    length: int
    algorithm: str = ""

    def __post_init__(self):
        object.__setattr__(self, "start", dict(self.start))

    def __eq__(self, other):
        if not isinstance(other, Schedule):
            return NotImplemented
        return self.start == other.start and self.length == other.length

    def __getitem__(self, name: str) -> int:
        return self.start[name]

    @classmethod
    def build(cls, dfg: Dfg, start: Mapping[str, int], lat: LatencyModel, algorithm: str = ""):
        length = max((start[n] + lat.of(dfg, n) - 1 for n in start), default=0)
        return cls(dict(start), length, algorithm)

    def end(self, dfg: Dfg, name: str, lat: LatencyModel) -> int:
        """Last step occupied by ``name``."""
        return self.start[name] + lat.of(dfg, name) - 1

    def steps(self, dfg: Dfg, lat: LatencyModel) -> dict[int, list[str]]:
        """Map each step to the operations occupying it, in node-id order."""
        table = {s: [] for s in range(1, self.length + 1)}
        for name in sorted(self.start, key=lambda n: dfg.node(n).id):
            for s in range(self.start[name], self.end(dfg, name, lat) + 1):
                table[s].append(name)
        return table


@dataclass(frozen=True)
class ResourceConstraints:
    """Functional-unit budget per kind; kinds not listed are unlimited."""

    limits: Mapping[OpKind, int] = field(default_factory=dict)

    def __post_init__(self):
        limits = {OpKind(k): int(v) for k, v in dict(self.limits).items() if v is not None}
        bad = [k.value for k, v in limits.items() if v < 1]
        if bad:
            raise ValueError(f"resource counts must be >= 1 (got {', '.join(bad)})")
        object.__setattr__(self, "limits", limits)

    def __hash__(self):
        return hash(tuple(sorted(self.limits.items())))

    def limit(self, kind: OpKind) -> int | None:
        return self.limits.get(kind)

    @classmethod
    def of(cls, **counts: int) -> ResourceConstraints:
        """``ResourceConstraints.of(add=3, mul=2)``"""
        return cls({OpKind(k): v for k, v in counts.items()})


UNLIMITED = ResourceConstraints()


def _operational(dfg: Dfg) -> None:
    for n in dfg.nodes:
        if n.cls is not NodeClass.OPERATIONAL:
            raise UnschedulableNode(n.name, n.cls.value)


def check_schedule(
    dfg: Dfg, sched: Schedule, lat: LatencyModel = UNIT, rc: ResourceConstraints | None = None
) -> list[str]:
    """Precedence, coverage, length and (optionally) resource violations."""
    out = []
    names = set(dfg.names)
    if set(sched.start) != names:
        out.append("schedule does not cover exactly the graph's nodes")
        return out
    for name, s in sched.start.items():
        if s < 1:
            out.append(f"{name} starts at step {s} < 1")
    for u, v in dfg.node_edges():
        if sched[v] < sched[u] + lat.of(dfg, u):
            out.append(f"precedence {u}->{v}: {v} at {sched[v]} before {u} finishes")
    expected = max((sched.end(dfg, n, lat) for n in names), default=0)
    if sched.length != expected:
        out.append(f"length {sched.length} but last step used is {expected}")
    if rc is not None:
        for kind, used in fu_usage(dfg, sched, lat).items():
            cap = rc.limit(kind)
            if cap is not None and used > cap:
                out.append(f"{used} {kind.value} units in use, budget {cap}")
    return out


def asap(dfg: Dfg, lat: LatencyModel = UNIT) -> Schedule:
    _operational(dfg)
    start: dict[str, int] = {}
    for name in topo_order(dfg):
        start[name] = 1 + max((start[p] + lat.of(dfg, p) - 1 for p in dfg.preds(name)), default=0)
    return Schedule.build(dfg, start, lat, "asap")


def alap(dfg: Dfg, lat: LatencyModel = UNIT, deadline: int | None = None) -> Schedule:
    """As-late-as-possible schedule; ``deadline`` defaults to the critical path."""
    _operational(dfg)
    cp = critical_path_length(dfg, lat)
    if deadline is None:
        deadline = cp
    if deadline < cp:
        raise InfeasibleDeadline(deadline, cp)
    start: dict[str, int] = {}
    for name in reversed(topo_order(dfg)):
        latest_end = min((start[s] - 1 for s in dfg.succs(name)), default=deadline)
        start[name] = latest_end - lat.of(dfg, name) + 1
    return Schedule.build(dfg, start, lat, "alap")


def mobility(asap_sched: Schedule, alap_sched: Schedule) -> dict[str, int]:
    if set(asap_sched.start) != set(alap_sched.start):
        raise NodeSetMismatch("ASAP and ALAP schedules cover different nodes")
    mob = {n: alap_sched[n] - asap_sched[n] for n in asap_sched.start}
    neg = [n for n, m in mob.items() if m < 0]
    if neg:
        raise NodeSetMismatch(f"ALAP earlier than ASAP for {', '.join(sorted(neg))}")
    return mob


def fu_usage(dfg: Dfg, sched: Schedule, lat: LatencyModel = UNIT) -> dict[OpKind, int]:
    """Maximum number of concurrently busy units per kind."""
    busy: dict[OpKind, Counter] = {}
    for name, s in sched.start.items():
        kind = dfg.kind(name)
        steps = busy.setdefault(kind, Counter())
        for t in range(s, s + lat.of(dfg, name)):
            steps[t] += 1
    return {k: max(c.values()) for k, c in sorted(busy.items())}


# -- list scheduling ---------------------------------------------------------

PriorityRule = Callable[[str], object]


def priority_rule(dfg: Dfg, lat: LatencyModel, rule: str) -> PriorityRule:
    """Named static priorities; smaller keys are scheduled first.

    ``mobility``  ALAP minus ASAP start (critical operations first)
    ``alap``      ALAP start, i.e. longest remaining path first
    ``asap``      ASAP start
    ``id``        node id only
    """
    if rule == "id":
        return lambda n: 0
    early = asap(dfg, lat)
    late = alap(dfg, lat)
    if rule == "mobility":
        mob = mobility(early, late)
        return mob.__getitem__
    if rule == "alap":
        return late.start.__getitem__
    if rule == "asap":
        return early.start.__getitem__
    raise ValueError(f"unknown priority rule {rule!r}")


def _fits(busy: dict[int, Counter], kind: OpKind, first: int, cycles: int, cap: int | None) -> bool:
    if cap is None:
        return True
    return all(busy.get(t, Counter())[kind] < cap for t in range(first, first + cycles))


def _occupy(busy: dict[int, Counter], kind: OpKind, first: int, cycles: int) -> None:
    for t in range(first, first + cycles):
        busy.setdefault(t, Counter())[kind] += 1


def _ready(dfg: Dfg, lat: LatencyModel, start: dict[str, int], pending: set[str], step: int):
    return [
        n
        for n in pending
        if all(p in start and start[p] + lat.of(dfg, p) <= step for p in dfg.preds(n))
    ]


def list_schedule(
    dfg: Dfg,
    lat: LatencyModel = UNIT,
    rc: ResourceConstraints = UNLIMITED,
    priority: PriorityRule | str = "mobility",
    algorithm: str = "list",
) -> Schedule:
    """Resource-constrained list scheduling.

    Steps are filled in increasing order.  At each step the ready operations
    are taken in ``(priority(op), node id)`` order while the per-kind budget
    lasts; multi-cycle operations hold their unit for every cycle.
    """
    _operational(dfg)
    topo_order(dfg)
    if isinstance(priority, str):
        priority = priority_rule(dfg, lat, priority)
    pending = set(dfg.names)
    start: dict[str, int] = {}
    busy: dict[int, Counter] = {}
    step = 1
    while pending:
        ready = _ready(dfg, lat, start, pending, step)
        ready.sort(key=lambda n: (priority(n), dfg.node(n).id))
        for name in ready:
            kind, cycles = dfg.kind(name), lat.of(dfg, name)
            if _fits(busy, kind, step, cycles, rc.limit(kind)):
                _occupy(busy, kind, step, cycles)
                start[name] = step
                pending.discard(name)
        step += 1
    return Schedule.build(dfg, start, lat, algorithm)


def mbs(dfg: Dfg, lat: LatencyModel = UNIT, rc: ResourceConstraints = UNLIMITED) -> Schedule:
    """Mobility-based list scheduling: least mobility first, ties by id."""
    return list_schedule(dfg, lat, rc, "mobility", algorithm="mbs")


# -- force-directed scheduling -----------------------------------------------


def time_frames(
    dfg: Dfg,
    lat: LatencyModel,
    deadline: int,
    fixed: Mapping[str, int] = {},
    floor: int = 1,
) -> dict[str, tuple[int, int]]:
    """Feasible start window per node given already fixed starts.

    Unfixed nodes may not start before ``floor``.  Windows can come out empty
    (lo > hi) when ``deadline`` is too tight; callers check.
    """
    order = topo_order(dfg)
    lo: dict[str, int] = {}
    for n in order:
        if n in fixed:
            lo[n] = fixed[n]
        else:
            lo[n] = max([floor] + [lo[p] + lat.of(dfg, p) for p in dfg.preds(n)])
    hi: dict[str, int] = {}
    for n in reversed(order):
        if n in fixed:
            hi[n] = fixed[n]
        else:
            hi[n] = min((hi[s] for s in dfg.succs(n)), default=deadline + 1) - lat.of(dfg, n)
    return {n: (lo[n], hi[n]) for n in order}


def _occupancy(frame: tuple[int, int], cycles: int) -> dict[int, float]:
    lo, hi = frame
    p = 1.0 / (hi - lo + 1)
    occ: dict[int, float] = {}
    for t in range(lo, hi + 1):
        for s in range(t, t + cycles):
            occ[s] = occ.get(s, 0.0) + p
    return occ


def _distribution(dfg: Dfg, lat: LatencyModel, frames) -> dict[tuple[OpKind, int], float]:
    dg: dict[tuple[OpKind, int], float] = {}
    for n, frame in frames.items():
        kind = dfg.kind(n)
        for s, p in _occupancy(frame, lat.of(dfg, n)).items():
            dg[kind, s] = dg.get((kind, s), 0.0) + p
    return dg


def distribution_graph(
    dfg: Dfg, lat: LatencyModel = UNIT, deadline: int | None = None
) -> dict[tuple[OpKind, int], float]:
    """Expected number of busy units per (kind, step) over ASAP..ALAP frames.

    Each operation spreads its start uniformly over its frame, so per kind
    the entries sum to the total latency of that kind's operations (the
    operation count under unit latencies).
    """
    _operational(dfg)
    cp = critical_path_length(dfg, lat)
    deadline = cp if deadline is None else deadline
    if deadline < cp:
        raise InfeasibleDeadline(deadline, cp)
    return _distribution(dfg, lat, time_frames(dfg, lat, deadline))


def _total_force(dfg, lat, dg, old_frames, new_frames) -> float:
    force = 0.0
    for n, new in new_frames.items():
        old = old_frames[n]
        if new == old:
            continue
        kind, cycles = dfg.kind(n), lat.of(dfg, n)
        before = _occupancy(old, cycles)
        after = _occupancy(new, cycles)
        for s in before.keys() | after.keys():
            force += dg.get((kind, s), 0.0) * (after.get(s, 0.0) - before.get(s, 0.0))
    return force


def _force_key(force: float) -> float:
    return round(force, 9)


def fds(
    dfg: Dfg, lat: LatencyModel = UNIT, deadline: int | None = None
) -> tuple[Schedule, dict[OpKind, int]]:
    """Time-constrained force-directed scheduling.

    Repeatedly fixes the (operation, step) pair of least total force, where
    the total force sums self force and the force of every other frame the
    assignment narrows.  Returns the schedule and its unit usage.
    """
    _operational(dfg)
    cp = critical_path_length(dfg, lat)
    deadline = cp if deadline is None else deadline
    if deadline < cp:
        raise InfeasibleDeadline(deadline, cp)
    fixed: dict[str, int] = {}
    frames = time_frames(dfg, lat, deadline)
    by_id = sorted(dfg.names, key=lambda n: dfg.node(n).id)
    while len(fixed) < len(by_id):
        forced = [n for n in by_id if n not in fixed and frames[n][0] == frames[n][1]]
        if forced:
            fixed[forced[0]] = frames[forced[0]][0]
            frames = time_frames(dfg, lat, deadline, fixed)
            continue
        dg = _distribution(dfg, lat, frames)
        best = None
        for n in by_id:
            if n in fixed:
                continue
            lo, hi = frames[n]
            for t in range(lo, hi + 1):
                trial = time_frames(dfg, lat, deadline, {**fixed, n: t})
                key = (_force_key(_total_force(dfg, lat, dg, frames, trial)), dfg.node(n).id, t)
                if best is None or key < best[0]:
                    best = (key, n, t, trial)
        _, n, t, frames = best
        fixed[n] = t
    sched = Schedule.build(dfg, fixed, lat, "fds")
    return sched, fu_usage(dfg, sched, lat)


def fdls(dfg: Dfg, lat: LatencyModel = UNIT, rc: ResourceConstraints = UNLIMITED) -> Schedule:
    """Force-directed list scheduling.

    List scheduling whose priority at each step is the total force of
    placing a ready operation in that step, computed from the distribution
    graph of the current frames.  The frame deadline starts at the critical
    path and stretches whenever deferrals push operations past it.
    """
    _operational(dfg)
    deadline = critical_path_length(dfg, lat)
    pending = set(dfg.names)
    start: dict[str, int] = {}
    busy: dict[int, Counter] = {}
    step = 1
    while pending:
        frames = time_frames(dfg, lat, deadline, start, floor=step)
        need = max(lo + lat.of(dfg, n) - 1 for n, (lo, _) in frames.items())
        if need > deadline:
            deadline = need
            frames = time_frames(dfg, lat, deadline, start, floor=step)
        ready = _ready(dfg, lat, start, pending, step)
        if ready:
            dg = _distribution(dfg, lat, frames)
            forces = {}
            for n in ready:
                trial = time_frames(dfg, lat, deadline, {**start, n: step}, floor=step)
                forces[n] = _force_key(_total_force(dfg, lat, dg, frames, trial))
            ready.sort(key=lambda n: (forces[n], dfg.node(n).id))
        for name in ready:
            kind, cycles = dfg.kind(name), lat.of(dfg, name)
            if _fits(busy, kind, step, cycles, rc.limit(kind)):
                _occupy(busy, kind, step, cycles)
                start[name] = step
                pending.discard(name)
        step += 1
    return Schedule.build(dfg, start, lat, "fdls")


def schedule_to_dict(dfg: Dfg, sched: Schedule, lat: LatencyModel = UNIT) -> dict:
    """JSON form; steps are numbered from 1."""
    order = sorted(sched.start, key=lambda n: dfg.node(n).id)
    return {
        "algorithm": sched.algorithm,
        "length": sched.length,
        "start": {n: sched[n] for n in order},
        "fu_usage": {k.value: v for k, v in fu_usage(dfg, sched, lat).items()},
    }
