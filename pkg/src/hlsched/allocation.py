"""Register and functional-unit binding for a scheduled graph."""

from __future__ import annotations

from collections.abc import Hashable, Iterable, Sequence
from dataclasses import dataclass, field
from itertools import combinations

from .dfg import UNIT, Dfg, LatencyModel, OpKind
from .schedule import Schedule, fu_usage


@dataclass(frozen=True, order=True)
class Lifetime:
    """Closed step interval during which a value must be held."""

    birth: int
    death: int
    value: str = field(compare=False)

    def __post_init__(self):
        if self.birth > self.death:
            raise ValueError(f"lifetime of {self.value} ends before it starts")

    def __len__(self):
        return self.death - self.birth + 1

    def end(self, shared_boundary: bool = False) -> int:
        """Exclusive end step of the register occupancy.

        Closed lifetimes hold the register through ``death``.  With
        ``shared_boundary`` the value dying at step s frees the register for
        a value written in step s, but every value holds it for at least one
        step.
        """
        if shared_boundary:
            return max(self.death, self.birth + 1)
        return self.death + 1

    def overlaps(self, other: Lifetime, shared_boundary: bool = False) -> bool:
        return self.birth < other.end(shared_boundary) and other.birth < self.end(shared_boundary)


def lifetimes(
    dfg: Dfg,
    sched: Schedule,
    lat: LatencyModel = UNIT,
    include_primary_inputs: bool = False,
) -> list[Lifetime]:
    """Value lifetimes, ordered like the graph's nodes.

    A node's value is born in the last step of its producer and lives until
    the latest step a consumer starts; primary outputs live until the end of
    the schedule.  Primary inputs, when included, are born at step 0.
    """
    outputs = set(dfg.outputs)
    out = []
    if include_primary_inputs:
        for name in dfg.inputs:
            uses = [sched[e.dst] for e in dfg.out_edges(name)]
            out.append(Lifetime(0, max(uses, default=0), name))
    for node in dfg.nodes:
        birth = sched.end(dfg, node.name, lat)
        death = max((sched[e.dst] for e in dfg.out_edges(node.name)), default=birth)
        if node.name in outputs:
            death = max(death, sched.length)
        out.append(Lifetime(birth, death, node.name))
    return out


@dataclass(frozen=True)
class RegisterBinding:
    register: dict[str, int]
    count: int


def left_edge(intervals: Iterable[Lifetime], shared_boundary: bool = False) -> RegisterBinding:
    """Left-edge register assignment.

    Intervals are taken by birth (ties by value name) and each goes into the
    lowest-numbered register whose last occupant is already dead.
    """
    free_at: list[int] = []
    register: dict[str, int] = {}
    for lt in sorted(intervals, key=lambda lt: (lt.birth, lt.value)):
        for r, end in enumerate(free_at):
            if end <= lt.birth:
                free_at[r] = lt.end(shared_boundary)
                register[lt.value] = r
                break
        else:
            register[lt.value] = len(free_at)
            free_at.append(lt.end(shared_boundary))
    return RegisterBinding(register, len(free_at))


def max_overlap(intervals: Sequence[Lifetime], shared_boundary: bool = False) -> int:
    """Largest number of intervals alive at one instant (sweep line)."""
    events = []
    for lt in intervals:
        events.append((lt.birth, 1))
        events.append((lt.end(shared_boundary), -1))
    live = peak = 0
    for _, delta in sorted(events):
        live += delta
        peak = max(peak, live)
    return peak


@dataclass(frozen=True)
class FuBinding:
    instance: dict[str, tuple[OpKind, int]]
    counts: dict[OpKind, int]


def bind_fus(dfg: Dfg, sched: Schedule, lat: LatencyModel = UNIT) -> FuBinding:
    """Left-edge binding of operations to unit instances, kind by kind."""
    instance = {}
    counts = {}
    for kind in dfg.kinds():
        busy = [
            Lifetime(sched[n.name], sched.end(dfg, n.name, lat), n.name)
            for n in dfg.nodes
            if n.op is kind
        ]
        binding = left_edge(busy)
        counts[kind] = binding.count
        for name, idx in binding.register.items():
            instance[name] = (kind, idx)
    return FuBinding(instance, counts)


# -- clique partitioning -----------------------------------------------------


@dataclass(frozen=True)
class CompatibilityGraph:
    """Undirected graph whose edges join items that may share a resource."""

    vertices: tuple[Hashable, ...]
    edges: frozenset[frozenset]

    @classmethod
    def from_pairs(cls, vertices, pairs) -> CompatibilityGraph:
        return cls(tuple(vertices), frozenset(frozenset(p) for p in pairs))

    def compatible(self, a, b) -> bool:
        return frozenset((a, b)) in self.edges


def value_compatibility(intervals: Sequence[Lifetime], shared_boundary: bool = False):
    return CompatibilityGraph.from_pairs(
        [lt.value for lt in intervals],
        [
            (a.value, b.value)
            for a, b in combinations(intervals, 2)
            if not a.overlaps(b, shared_boundary)
        ],
    )


def op_compatibility(dfg: Dfg, sched: Schedule, lat: LatencyModel = UNIT):
    """Same-kind operations whose busy steps are disjoint."""
    busy = {n.name: Lifetime(sched[n.name], sched.end(dfg, n.name, lat), n.name) for n in dfg.nodes}
    pairs = [
        (a.name, b.name)
        for a, b in combinations(dfg.nodes, 2)
        if a.op is b.op and not busy[a.name].overlaps(busy[b.name])
    ]
    return CompatibilityGraph.from_pairs(dfg.names, pairs)


def clique_partition(g: CompatibilityGraph) -> list[list]:
    """Greedy common-neighbour clique partitioning.

    Super-vertices start as singletons.  The compatible pair sharing the
    most common neighbours is merged (ties to the lowest vertex positions)
    and the merged vertex keeps only the neighbours both had, until no
    compatible pair is left.
    """
    groups: dict[int, list] = {i: [v] for i, v in enumerate(g.vertices)}
    adj: dict[int, set[int]] = {i: set() for i in groups}
    index = {v: i for i, v in enumerate(g.vertices)}
    for edge in g.edges:
        if len(edge) != 2:
            continue
        a, b = (index[v] for v in edge)
        adj[a].add(b)
        adj[b].add(a)
    while True:
        best = None
        for a in sorted(groups):
            for b in sorted(adj[a]):
                if b <= a:
                    continue
                key = (-len(adj[a] & adj[b]), a, b)
                if best is None or key < best:
                    best = key
        if best is None:
            break
        _, a, b = best
        keep = adj[a] & adj[b]
        for n in adj[a] | adj[b]:
            adj[n].discard(a)
            adj[n].discard(b)
        adj[a] = keep
        for n in keep:
            adj[n].add(a)
        del adj[b]
        groups[a].extend(groups.pop(b))
    return [groups[k] for k in sorted(groups)]


# -- report ------------------------------------------------------------------


@dataclass(frozen=True)
class AllocationResult:
    algorithm: str
    fu: dict[OpKind, int]
    registers: int
    registers_clique: int
    conventions: dict[str, int]
    lifetimes: tuple[Lifetime, ...]
    register_binding: RegisterBinding
    fu_binding: FuBinding

    @property
    def fu_total(self) -> int:
        return sum(self.fu.values())

    def to_dict(self) -> dict:
        order = [lt.value for lt in self.lifetimes]
        return {
            "algorithm": self.algorithm,
            "fu_total": self.fu_total,
            "fu": {k.value: v for k, v in self.fu.items()},
            "registers": self.registers,
            "registers_clique": self.registers_clique,
            "register_conventions": dict(self.conventions),
            "bindings": {
                "registers": {n: self.register_binding.register[n] for n in order},
                "units": {n: f"{k.value}#{i}" for n in order for k, i in [self.fu_binding.instance[n]]},
            },
        }


def allocation_report(
    dfg: Dfg, sched: Schedule, lat: LatencyModel = UNIT, algorithm: str | None = None
) -> AllocationResult:
    """Unit and register totals for one schedule.

    ``registers`` uses the default convention (closed lifetimes, primary
    inputs excluded); ``conventions`` lists the count under every pairing
    of boundary rule and primary-input rule.
    """
    values = lifetimes(dfg, sched, lat)
    binding = left_edge(values)
    conventions = {}
    for with_inputs in (False, True):
        lts = lifetimes(dfg, sched, lat, include_primary_inputs=with_inputs)
        for shared in (False, True):
            key = ("half_open" if shared else "closed") + ("_with_inputs" if with_inputs else "")
            conventions[key] = left_edge(lts, shared_boundary=shared).count
    cliques = clique_partition(value_compatibility(values))
    return AllocationResult(
        algorithm=algorithm if algorithm is not None else sched.algorithm,
        fu=fu_usage(dfg, sched, lat),
        registers=binding.count,
        registers_clique=len(cliques),
        conventions=conventions,
        lifetimes=tuple(values),
        register_binding=binding,
        fu_binding=bind_fus(dfg, sched, lat),
    )
