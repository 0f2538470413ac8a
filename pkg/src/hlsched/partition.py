"""Two-way hardware/software partitioning and its communication metrics."""

from __future__ import annotations

import enum
from collections.abc import Mapping
from dataclasses import dataclass, field

from .allocation import clique_partition, op_compatibility
from .dfg import UNIT, Dfg, LatencyModel, OpKind, topo_order
from .schedule import Schedule


class Side(enum.Enum):
    HW = "hw"
    SW = "sw"

    def other(self) -> Side:
        return Side.SW if self is Side.HW else Side.HW


Partition = Mapping[str, Side]


def _kind_map(values) -> dict[OpKind, int]:
    return {OpKind(k): v for k, v in dict(values).items()}


@dataclass(frozen=True)
class CostModel:
    """Cycle costs per kind on each side plus a per-crossing transfer cost.

    Kinds missing from ``sw_cycles``/``hw_cycles`` cost one cycle.
    """

    sw_cycles: Mapping[OpKind, int] = field(default_factory=lambda: {OpKind.MUL: 4})
    hw_cycles: Mapping[OpKind, int] = field(default_factory=dict)
    transfer_cycles: int = 1

    def __post_init__(self):
        sw, hw = _kind_map(self.sw_cycles), _kind_map(self.hw_cycles)
        if any(v < 0 for v in (*sw.values(), *hw.values(), self.transfer_cycles)):
            raise ValueError("cycle costs must be non-negative")
        object.__setattr__(self, "sw_cycles", sw)
        object.__setattr__(self, "hw_cycles", hw)

    def sw(self, kind: OpKind) -> int:
        return self.sw_cycles.get(kind, 1)

    def hw(self, kind: OpKind) -> int:
        return self.hw_cycles.get(kind, 1)

    def cycles(self, kind: OpKind, side: Side) -> int:
        return self.hw(kind) if side is Side.HW else self.sw(kind)


@dataclass(frozen=True)
class PartitionMetrics:
    edge_cut: int
    buffer_peak: int
    buffer_total: int
    delay: int
    comm_cost: int


def partition_by_cycles(dfg: Dfg, cost: CostModel, threshold: float) -> dict[str, Side]:
    """Operations costing at least ``threshold`` software cycles go to hardware."""
    return {n.name: Side.HW if cost.sw(n.op) >= threshold else Side.SW for n in dfg.nodes}


def partition_by_clique(
    dfg: Dfg, sched: Schedule, cost: CostModel | None = None, lat: LatencyModel = UNIT
) -> dict[str, Side]:
    """Clique-partition the operation compatibility graph, then balance.

    Cliques (operations that could share one unit) are dealt out largest
    first, by total software cycles, to whichever side is currently lighter;
    ties go to hardware.
    """
    cost = cost or CostModel()
    cliques = clique_partition(op_compatibility(dfg, sched, lat))
    weight = [sum(cost.sw(dfg.kind(n)) for n in c) for c in cliques]
    order = sorted(range(len(cliques)), key=lambda i: (-weight[i], dfg.node(cliques[i][0]).id))
    load = {Side.HW: 0, Side.SW: 0}
    sides = {}
    for i in order:
        side = Side.HW if load[Side.HW] <= load[Side.SW] else Side.SW
        load[side] += weight[i]
        for n in cliques[i]:
            sides[n] = side
    return sides


def crossing_edges(dfg: Dfg, p: Partition) -> list[tuple[str, str]]:
    return [(u, v) for u, v in dfg.node_edges() if p[u] is not p[v]]


def edge_cut(dfg: Dfg, p: Partition) -> int:
    return len(crossing_edges(dfg, p))


def buffer_size(
    dfg: Dfg, sched: Schedule, p: Partition, lat: LatencyModel = UNIT
) -> tuple[int, int]:
    """Peak and total buffering of values that cross the partition.

    A crossing value is buffered from its producer's last step to the latest
    start of a consumer on the other side (closed interval).  ``total`` is
    in value-steps.
    """
    spans = []
    for u in topo_order(dfg):
        far = [sched[v] for v in dfg.succs(u) if p[v] is not p[u]]
        if far:
            spans.append((sched.end(dfg, u, lat), max(far)))
    if not spans:
        return 0, 0
    peak = max(sum(1 for b, d in spans if b <= t <= d) for t in {b for b, _ in spans})
    total = sum(d - b + 1 for b, d in spans)
    return peak, total


def system_delay(dfg: Dfg, p: Partition, cost: CostModel) -> tuple[int, int]:
    """Longest path with side-dependent node costs and paid crossings.

    Returns ``(delay, comm_cost)`` where ``comm_cost`` charges the transfer
    cost once per crossing edge.
    """
    finish: dict[str, int] = {}
    for n in topo_order(dfg):
        ready = 0
        for u in dfg.preds(n):
            hop = cost.transfer_cycles if p[u] is not p[n] else 0
            ready = max(ready, finish[u] + hop)
        finish[n] = ready + cost.cycles(dfg.kind(n), p[n])
    return max(finish.values(), default=0), edge_cut(dfg, p) * cost.transfer_cycles


def partition_metrics(
    dfg: Dfg, sched: Schedule, p: Partition, cost: CostModel, lat: LatencyModel = UNIT
) -> PartitionMetrics:
    peak, total = buffer_size(dfg, sched, p, lat)
    delay, comm = system_delay(dfg, p, cost)
    return PartitionMetrics(edge_cut(dfg, p), peak, total, delay, comm)


def partition_to_dict(dfg: Dfg, strategy: str, p: Partition, m: PartitionMetrics) -> dict:
    return {
        "strategy": strategy,
        "sides": {n.name: p[n.name].value for n in dfg.nodes},
        "edge_cut": m.edge_cut,
        "buffer_peak": m.buffer_peak,
        "buffer_total": m.buffer_total,
        "delay": m.delay,
        "comm_cost": m.comm_cost,
    }

