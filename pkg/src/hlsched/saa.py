"""Chain merging, serial-to-parallel rebalancing and critical-path moves.

The scheduling-and-allocation flow works on single-fanout chains of one
associative, commutative kind.  Each chain is rewritten from its most
serial form into a balanced tree over the same operands, the graph is
list scheduled, and operations on the critical path are then pulled into
earlier steps wherever precedence and the unit budget allow.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .dfg import UNIT, Dfg, Edge, LatencyModel, OpKind, critical_path_length
from .errors import NonAssociativeKind
from .schedule import ResourceConstraints, Schedule, alap, asap, mbs, mobility, schedule_to_dict


@dataclass(frozen=True)
class Chain:
    nodes: tuple[str, ...]
    kind: OpKind
    inputs: tuple[str, ...]

    @property
    def sink(self) -> str:
        return self.nodes[-1]

    @property
    def depth(self) -> int:
        """Depth of the balanced tree over the chain's operands."""
        return (len(self.inputs) - 1).bit_length()


@dataclass(frozen=True)
class Cut:
    """Critical chain edge at which the serial form is split."""

    src: str
    dst: str


@dataclass(frozen=True)
class Move:
    node: str
    from_step: int
    to_step: int


@dataclass(frozen=True)
class SaaResult:
    dfg: Dfg
    schedule: Schedule
    chains: tuple[Chain, ...]
    cuts: tuple[Cut, ...]
    moves: tuple[Move, ...]
    baseline: Schedule
    lat: LatencyModel = field(default=UNIT, compare=False)

    @property
    def baseline_length(self) -> int:
        return self.baseline.length

    @property
    def final_length(self) -> int:
        return self.schedule.length

    def to_dict(self) -> dict:
        out = schedule_to_dict(self.dfg, self.schedule, self.lat)
        out["baseline_length"] = self.baseline_length
        out["transform"] = {
            "chains": [list(c.nodes) for c in self.chains],
            "cuts": [[c.src, c.dst] for c in self.cuts],
            "moves": [{"node": m.node, "from": m.from_step, "to": m.to_step} for m in self.moves],
        }
        return out


def _links(dfg: Dfg) -> dict[str, str]:
    """Map each chainable node to the chain predecessor it absorbs."""
    outputs = set(dfg.outputs)
    back: dict[str, str] = {}
    for v in dfg.nodes:
        if v.op is None or not v.op.associative:
            continue
        for e in dfg.in_edges(v.name):
            u = e.src
            if not dfg.has_node(u) or u in outputs or dfg.kind(u) is not v.op:
                continue
            if len(dfg.out_edges(u)) != 1:
                continue
            back[v.name] = u  # lowest port wins
            break
    return back


def find_chains(dfg: Dfg) -> list[Chain]:
    """All maximal same-kind single-fanout chains of two or more nodes.

    A node ends a chain when it has more than one outgoing edge, is a
    primary output, or feeds an operation of another kind.  Where two
    chainable operands meet, the one on the lower port continues the chain.
    """
    back = _links(dfg)
    absorbed = set(back.values())
    chains = []
    for node in dfg.nodes:
        if node.name not in back or node.name in absorbed:
            continue
        seq = [node.name]
        while seq[-1] in back:
            seq.append(back[seq[-1]])
        seq.reverse()
        inputs = list(dfg.operands(seq[0]))
        for prev, cur in zip(seq, seq[1:]):
            ops = list(dfg.operands(cur))
            ops.remove(prev)
            inputs.extend(ops)
        chains.append(Chain(tuple(seq), node.op, tuple(inputs)))
    return chains


def _split(n: int) -> int:
    """Operands in the left subtree: the largest power of two below n."""
    return 1 << ((n - 1).bit_length() - 1)


def rebalance_chain(dfg: Dfg, chain: Chain) -> Dfg:
    """Replace a serial chain by a balanced tree over the same operands.

    The root keeps the sink's name so every consumer is untouched; the
    remaining chain names are reused for the inner tree nodes in post-order.
    """
    if not chain.kind.associative:
        raise NonAssociativeKind(f"{chain.kind.value} chains cannot be re-associated")
    names = iter(chain.nodes[:-1])
    members = set(chain.nodes)
    new_edges: list[Edge] = []

    def build(items, name=None):
        if len(items) == 1:
            return items[0]
        left = _split(len(items))
        lhs = build(items[:left])
        rhs = build(items[left:])
        name = name or next(names)
        new_edges.append(Edge(lhs, name, 0))
        new_edges.append(Edge(rhs, name, 1))
        return name

    build(list(chain.inputs), chain.sink)
    kept = [e for e in dfg.edges if e.dst not in members]
    return Dfg(dfg.nodes, tuple(kept + new_edges), dfg.inputs, dfg.outputs)


def _critical(dfg: Dfg, sched: Schedule, lat: LatencyModel) -> set[str]:
    crit = set()
    order = sorted(sched.start, key=lambda n: -sched.end(dfg, n, lat))
    for n in order:
        end = sched.end(dfg, n, lat)
        if end == sched.length or any(s in crit and sched[s] == end + 1 for s in dfg.succs(n)):
            crit.add(n)
    return crit


def _moves(dfg: Dfg, sched: Schedule, lat: LatencyModel, rc: ResourceConstraints):
    start = dict(sched.start)
    moves: list[Move] = []
    busy: dict[tuple[OpKind, int], int] = {}
    for n, s in start.items():
        for t in range(s, s + lat.of(dfg, n)):
            busy[dfg.kind(n), t] = busy.get((dfg.kind(n), t), 0) + 1
    while True:
        current = Schedule.build(dfg, start, lat)
        crit = sorted(_critical(dfg, current, lat), key=lambda n: (start[n], dfg.node(n).id))
        for n in crit:
            t = start[n] - 1
            kind, cycles = dfg.kind(n), lat.of(dfg, n)
            if t < 1 or any(start[p] + lat.of(dfg, p) > t for p in dfg.preds(n)):
                continue
            cap = rc.limit(kind)
            if cap is not None and busy.get((kind, t), 0) >= cap:
                continue
            busy[kind, t] = busy.get((kind, t), 0) + 1
            busy[kind, t + cycles] -= 1
            moves.append(Move(n, start[n], t))
            start[n] = t
            break
        else:
            return Schedule.build(dfg, start, lat, sched.algorithm), moves


def cut_and_move(
    dfg: Dfg, sched: Schedule, lat: LatencyModel = UNIT, rc: ResourceConstraints = ResourceConstraints()
) -> Schedule:
    """Pull critical-path operations one step earlier until nothing moves.

    An operation moves when all its predecessors have finished before the
    destination step and that step still has a free unit of its kind.
    """
    return _moves(dfg, sched, lat, rc)[0]


def saa(
    dfg: Dfg, lat: LatencyModel = UNIT, rc: ResourceConstraints = ResourceConstraints()
) -> SaaResult:
    """Scheduling-and-allocation flow: rebalance chains, schedule, move.

    The baseline is mobility-based list scheduling of the untouched graph
    under the same budget.  A chain rewrite is kept only if it does not
    lengthen the critical path, and the rewritten graph is used only when
    its final schedule beats the baseline flow, so the result is never
    longer than the baseline.
    """
    baseline = mbs(dfg, lat, rc)
    plain, plain_moves = _moves(dfg, baseline, lat, rc)

    slack = mobility(asap(dfg, lat), alap(dfg, lat))
    graph = dfg
    applied, cuts = [], []
    for chain in find_chains(dfg):
        candidate = rebalance_chain(graph, chain)
        before = critical_path_length(graph, lat)
        if critical_path_length(candidate, lat) > before:
            continue
        left = _split(len(chain.inputs))
        cut = Cut(chain.nodes[left - 2], chain.nodes[left - 1])
        if chain.depth < len(chain.nodes) and slack[cut.src] == slack[cut.dst] == 0:
            cuts.append(cut)
        graph = candidate
        applied.append(chain)

    if applied:
        sched, moves = _moves(graph, mbs(graph, lat, rc), lat, rc)
        if sched.length < plain.length:
            sched = Schedule(sched.start, sched.length, "saa")
            return SaaResult(graph, sched, tuple(applied), tuple(cuts), tuple(moves), baseline, lat)
    plain = Schedule(plain.start, plain.length, "saa")
    return SaaResult(dfg, plain, (), (), tuple(plain_moves), baseline, lat)
