"""Data-flow graph model, validation, exact evaluation and built-in fixtures.

A :class:`Dfg` is an immutable DAG of typed nodes.  Edges carry values from
a producer (a node or a primary input) into a numbered input port of a
consumer node.  Nodes are identified by name; ``Node.id`` is the ordinal
used for every deterministic tie-break in the package.
"""

from __future__ import annotations

import enum
import heapq
import json
import random
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from importlib import resources

from .errors import CyclicGraph, MissingInput, ParseError, UnschedulableNode, ValidationError


class OpKind(enum.Enum):
    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    NEG = "neg"
    COPY = "copy"

    @property
    def arity(self) -> int:
        return 1 if self in (OpKind.NEG, OpKind.COPY) else 2

    @property
    def associative(self) -> bool:
        """True for kinds that are both associative and commutative."""
        return self in (OpKind.ADD, OpKind.MUL)

    def __lt__(self, other):
        return _KIND_ORDER[self] < _KIND_ORDER[other]


_KIND_ORDER = {k: i for i, k in enumerate(OpKind)}


class NodeClass(enum.Enum):
    OPERATIONAL = "operational"
    CALL = "call"
    CONTROL = "control"
    STORAGE = "storage"


@dataclass(frozen=True)
class Node:
    id: int
    name: str
    cls: NodeClass = NodeClass.OPERATIONAL
    op: OpKind | None = None


@dataclass(frozen=True)
class Edge:
    src: str
    dst: str
    port: int


@dataclass(frozen=True, eq=False)
class Dfg:
    """Immutable data-flow graph.

    Construction does not validate; call :func:`validate` (or build through
    :func:`parse_dfg`) to check the structural invariants.
    """

    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]
    inputs: tuple[str, ...] = ()
    outputs: tuple[str, ...] = ()

    def __post_init__(self):
        for name in ("nodes", "edges", "inputs", "outputs"):
            object.__setattr__(self, name, tuple(getattr(self, name)))

    def __eq__(self, other):
        if not isinstance(other, Dfg):
            return NotImplemented
        return (
            self.nodes == other.nodes
            and set(self.edges) == set(other.edges)
            and self.inputs == other.inputs
            and self.outputs == other.outputs
        )

    def __hash__(self):
        return hash((self.nodes, frozenset(self.edges), self.inputs, self.outputs))

    @classmethod
    def from_ops(
        cls,
        inputs: Iterable[str],
        ops: Iterable[tuple[str, OpKind | str, Iterable[str]]],
        outputs: Iterable[str],
    ) -> Dfg:
        """Build an operational graph from ``(name, kind, operands)`` triples.

        >>> g = Dfg.from_ops(["x", "y"], [("s", "add", ["x", "y"])], ["s"])
        >>> g.operands("s")
        ('x', 'y')
        """
        nodes, edges = [], []
        for i, (name, kind, operands) in enumerate(ops):
            nodes.append(Node(i, name, NodeClass.OPERATIONAL, OpKind(kind)))
            edges.extend(Edge(src, name, port) for port, src in enumerate(operands))
        return cls(tuple(nodes), tuple(edges), tuple(inputs), tuple(outputs))

    @cached_property
    def _by_name(self) -> dict[str, Node]:
        return {n.name: n for n in self.nodes}

    @cached_property
    def _in_edges(self) -> dict[str, tuple[Edge, ...]]:
        acc: dict[str, list[Edge]] = {n.name: [] for n in self.nodes}
        for e in self.edges:
            acc.setdefault(e.dst, []).append(e)
        return {k: tuple(sorted(v, key=lambda e: e.port)) for k, v in acc.items()}

    @cached_property
    def _out_edges(self) -> dict[str, tuple[Edge, ...]]:
        acc: dict[str, list[Edge]] = {n: [] for n in self.inputs}
        acc.update({n.name: [] for n in self.nodes})
        for e in self.edges:
            acc.setdefault(e.src, []).append(e)
        return {k: tuple(v) for k, v in acc.items()}

    def node(self, name: str) -> Node:
        return self._by_name[name]

    def has_node(self, name: str) -> bool:
        return name in self._by_name

    @property
    def names(self) -> list[str]:
        return [n.name for n in self.nodes]

    def in_edges(self, name: str) -> tuple[Edge, ...]:
        return self._in_edges.get(name, ())

    def out_edges(self, name: str) -> tuple[Edge, ...]:
        return self._out_edges.get(name, ())

    def operands(self, name: str) -> tuple[str, ...]:
        return tuple(e.src for e in self.in_edges(name))

    def preds(self, name: str) -> list[str]:
        """Distinct node predecessors (primary inputs excluded), in port order."""
        seen = []
        for e in self.in_edges(name):
            if e.src in self._by_name and e.src not in seen:
                seen.append(e.src)
        return seen

    def succs(self, name: str) -> list[str]:
        seen = []
        for e in self.out_edges(name):
            if e.dst not in seen:
                seen.append(e.dst)
        return sorted(seen, key=lambda n: self._by_name[n].id)

    def kind(self, name: str) -> OpKind | None:
        return self._by_name[name].op

    def count(self, kind: OpKind) -> int:
        return sum(1 for n in self.nodes if n.op is kind)

    def kinds(self) -> list[OpKind]:
        return sorted({n.op for n in self.nodes if n.op is not None})

    def node_edges(self) -> list[tuple[str, str]]:
        """Edges between nodes, one per (src, dst) pair."""
        return sorted(
            {(e.src, e.dst) for e in self.edges if e.src in self._by_name and e.dst in self._by_name},
            key=lambda p: (self._by_name[p[0]].id, self._by_name[p[1]].id),
        )


@dataclass(frozen=True)
class LatencyModel:
    """Cycles per operation kind; kinds not listed take ``default``."""

    cycles: Mapping[OpKind, int] = field(default_factory=dict)
    default: int = 1

    def __post_init__(self):
        cycles = {OpKind(k): int(v) for k, v in dict(self.cycles).items()}
        if self.default < 1 or any(v < 1 for v in cycles.values()):
            raise ValueError("latencies must be >= 1")
        object.__setattr__(self, "cycles", cycles)

    def __call__(self, kind: OpKind | None) -> int:
        if kind is None:
            return self.default
        return self.cycles.get(kind, self.default)

    def __hash__(self):
        return hash((tuple(sorted(self.cycles.items())), self.default))

    def of(self, dfg: Dfg, name: str) -> int:
        return self(dfg.kind(name))


UNIT = LatencyModel()


def validate(dfg: Dfg) -> list[str]:
    """Return every structural violation of ``dfg``; an empty list means ok."""
    out: list[str] = []
    names: set[str] = set()
    ids: set[int] = set()
    inputs = set()
    for name in dfg.inputs:
        if name in inputs:
            out.append(f"duplicate input name {name!r}")
        inputs.add(name)
    for n in dfg.nodes:
        if n.name in names:
            out.append(f"duplicate node name {n.name!r}")
        if n.id in ids:
            out.append(f"duplicate node id {n.id}")
        if n.name in inputs:
            out.append(f"node name {n.name!r} collides with a primary input")
        names.add(n.name)
        ids.add(n.id)
        if n.cls is NodeClass.OPERATIONAL and n.op is None:
            out.append(f"operational node {n.name!r} has no op kind")
        if n.cls is not NodeClass.OPERATIONAL and n.op is not None:
            out.append(f"{n.cls.value} node {n.name!r} carries an op kind")

    ports: dict[str, set[int]] = {n.name: set() for n in dfg.nodes}
    for e in dfg.edges:
        if e.src not in names and e.src not in inputs:
            out.append(f"dangling reference {e.src!r} in edge {e.src}->{e.dst}")
        if e.dst not in names:
            out.append(f"dangling reference {e.dst!r} in edge {e.src}->{e.dst}")
            continue
        if e.port < 0:
            out.append(f"negative port {e.port} on node {e.dst!r}")
        elif e.port in ports[e.dst]:
            out.append(f"duplicate port {e.port} on node {e.dst!r}")
        ports[e.dst].add(e.port)

    for n in dfg.nodes:
        fed = ports.get(n.name, set())
        if n.cls is NodeClass.OPERATIONAL and n.op is not None:
            expected = set(range(n.op.arity))
        else:
            expected = set(range(len(fed)))
        for p in sorted(expected - fed):
            out.append(f"unfed port {p} on node {n.name!r}")
        for p in sorted(fed - expected):
            if p >= 0:
                out.append(f"unexpected port {p} on node {n.name!r}")

    for name in dfg.outputs:
        if name not in names:
            out.append(f"dangling reference {name!r} in outputs")

    cycle = _find_cycle(dfg)
    if cycle:
        out.append("cycle: " + " -> ".join(cycle))

    reached = set(inputs)
    frontier = list(inputs)
    while frontier:
        cur = frontier.pop()
        for e in dfg.out_edges(cur):
            if e.dst not in reached:
                reached.add(e.dst)
                frontier.append(e.dst)
    for n in dfg.nodes:
        if n.name not in reached and not cycle:
            out.append(f"node {n.name!r} is unreachable from the primary inputs")
    return out


def check(dfg: Dfg) -> Dfg:
    """Raise :class:`ValidationError` unless ``dfg`` validates; returns it."""
    violations = validate(dfg)
    if violations:
        raise ValidationError(violations)
    return dfg


def _find_cycle(dfg: Dfg) -> list[str]:
    names = {n.name for n in dfg.nodes}
    succ: dict[str, list[str]] = {n: [] for n in names}
    for e in dfg.edges:
        if e.src in names and e.dst in names:
            succ[e.src].append(e.dst)
    state = dict.fromkeys(names, 0)
    for root in sorted(names, key=lambda n: dfg.node(n).id if dfg.has_node(n) else 0):
        if state[root]:
            continue
        stack = [(root, iter(succ[root]))]
        path = [root]
        state[root] = 1
        while stack:
            cur, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                state[cur] = 2
                stack.pop()
                path.pop()
            elif state[nxt] == 1:
                return path[path.index(nxt):] + [nxt]
            elif state[nxt] == 0:
                state[nxt] = 1
                stack.append((nxt, iter(succ[nxt])))
                path.append(nxt)
    return []


def topo_order(dfg: Dfg) -> list[str]:
    """Node names in topological order, ties broken by ascending node id."""
    indeg = {n.name: len(dfg.preds(n.name)) for n in dfg.nodes}
    heap = [(n.id, n.name) for n in dfg.nodes if indeg[n.name] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        _, name = heapq.heappop(heap)
        order.append(name)
        for s in dfg.succs(name):
            indeg[s] -= 1
            if indeg[s] == 0:
                heapq.heappush(heap, (dfg.node(s).id, s))
    if len(order) != len(dfg.nodes):
        raise CyclicGraph(_find_cycle(dfg))
    return order


def critical_path_length(dfg: Dfg, lat: LatencyModel = UNIT) -> int:
    """Longest latency-weighted path through ``dfg``."""
    finish: dict[str, int] = {}
    for name in topo_order(dfg):
        start = max((finish[p] for p in dfg.preds(name)), default=0)
        finish[name] = start + lat.of(dfg, name)
    return max(finish.values(), default=0)


def evaluate(dfg: Dfg, inputs: Mapping[str, object]) -> dict[str, Fraction]:
    """Interpret ``dfg`` over exact rationals; returns one value per output."""
    env: dict[str, Fraction] = {}
    for name in dfg.inputs:
        if name not in inputs:
            raise MissingInput(name)
        env[name] = Fraction(inputs[name])
    for name in topo_order(dfg):
        node = dfg.node(name)
        args = [env[src] for src in dfg.operands(name)]
        if node.cls is NodeClass.STORAGE:
            env[name] = args[0]
            continue
        if node.cls is not NodeClass.OPERATIONAL:
            raise UnschedulableNode(name, node.cls.value)
        env[name] = _apply(node.op, args)
    return {name: env[name] for name in dfg.outputs}


def _apply(op: OpKind, args: list[Fraction]) -> Fraction:
    if op is OpKind.ADD:
        return args[0] + args[1]
    if op is OpKind.SUB:
        return args[0] - args[1]
    if op is OpKind.MUL:
        return args[0] * args[1]
    if op is OpKind.NEG:
        return -args[0]
    return args[0]


# -- JSON format -------------------------------------------------------------


def _require(cond, message, where):
    if not cond:
        raise ParseError(message, where)


def _str_list(obj, key):
    value = obj.get(key, [])
    _require(isinstance(value, list), "expected a list", key)
    for i, item in enumerate(value):
        _require(isinstance(item, str), "expected a string", f"{key}[{i}]")
    return value


def dfg_from_dict(obj: object) -> Dfg:
    """Build a Dfg from decoded JSON without validating it."""
    _require(isinstance(obj, dict), "top level must be an object", "$")
    inputs = _str_list(obj, "inputs")
    outputs = _str_list(obj, "outputs")
    raw_nodes = obj.get("nodes")
    _require(isinstance(raw_nodes, list), "expected a list", "nodes")
    nodes = []
    for i, raw in enumerate(raw_nodes):
        where = f"nodes[{i}]"
        _require(isinstance(raw, dict), "expected an object", where)
        name = raw.get("name")
        _require(isinstance(name, str) and name, "missing or empty name", f"{where}.name")
        cls_text = raw.get("class", "operational")
        try:
            cls = NodeClass(cls_text)
        except (ValueError, TypeError):
            raise ParseError(f"unknown node class {cls_text!r}", f"{where}.class") from None
        op = None
        if "op" in raw and raw["op"] is not None:
            try:
                op = OpKind(raw["op"])
            except (ValueError, TypeError):
                raise ParseError(f"unknown op {raw['op']!r}", f"{where}.op") from None
        nodes.append(Node(i, name, cls, op))
    raw_edges = obj.get("edges", [])
    _require(isinstance(raw_edges, list), "expected a list", "edges")
    edges = []
    for i, raw in enumerate(raw_edges):
        where = f"edges[{i}]"
        _require(isinstance(raw, dict), "expected an object", where)
        src, dst, port = raw.get("from"), raw.get("to"), raw.get("port", 0)
        _require(isinstance(src, str), "expected a string", f"{where}.from")
        _require(isinstance(dst, str), "expected a string", f"{where}.to")
        _require(
            isinstance(port, int) and not isinstance(port, bool), "expected an integer", f"{where}.port"
        )
        edges.append(Edge(src, dst, port))
    return Dfg(tuple(nodes), tuple(edges), tuple(inputs), tuple(outputs))


def parse_dfg(text: str) -> Dfg:
    """Parse and validate DFG JSON text.

    Raises :class:`ParseError` for malformed JSON or fields and
    :class:`ValidationError` listing every invariant violation.
    """
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno}") from None
    except (TypeError, ValueError, RecursionError) as exc:
        raise ParseError(str(exc)) from None
    return check(dfg_from_dict(obj))


def dfg_to_dict(dfg: Dfg) -> dict:
    nodes = []
    for n in dfg.nodes:
        item = {"name": n.name, "class": n.cls.value}
        if n.op is not None:
            item["op"] = n.op.value
        nodes.append(item)
    return {
        "inputs": list(dfg.inputs),
        "nodes": nodes,
        "edges": [{"from": e.src, "to": e.dst, "port": e.port} for e in dfg.edges],
        "outputs": list(dfg.outputs),
    }


def dump_dfg(dfg: Dfg) -> str:
    return json.dumps(dfg_to_dict(dfg), indent=1)


# -- fixtures ----------------------------------------------------------------

FIXTURES = ("chain4", "diamond", "ewf")


def fixture_text(name: str) -> str:
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(FIXTURES)}")
    return resources.files("hlsched.data").joinpath(f"{name}.json").read_text("utf-8")


def load_fixture(name: str) -> Dfg:
    return parse_dfg(fixture_text(name))


def fixture_meta(name: str) -> dict:
    """The free-form ``meta`` block stored alongside a fixture."""
    return json.loads(fixture_text(name)).get("meta", {})


def ewf_benchmark() -> Dfg:
    """Fifth-order elliptic wave filter: 34 operations (26 add, 8 mul)."""
    return load_fixture("ewf")


def random_dag(
    n_ops: int,
    seed: int | None = None,
    kinds: tuple[OpKind, ...] = (OpKind.ADD, OpKind.MUL),
    n_inputs: int = 4,
    edge_bias: float = 0.6,
) -> Dfg:
    """Random valid operational DAG, reproducible from ``seed``.

    Each operand comes from an earlier node with probability ``edge_bias``,
    otherwise from a primary input.  Nodes nobody consumes become outputs.
    """
    rng = random.Random(seed)
    inputs = [f"x{i + 1}" for i in range(max(1, n_inputs))]
    ops = []
    for i in range(n_ops):
        kind = rng.choice(kinds)
        operands = []
        for _ in range(kind.arity):
            if i and rng.random() < edge_bias:
                operands.append(f"v{rng.randrange(i) + 1}")
            else:
                operands.append(rng.choice(inputs))
        ops.append((f"v{i + 1}", kind, operands))
    used = {a for _, _, args in ops for a in args}
    outputs = [name for name, _, _ in ops if name not in used]
    return Dfg.from_ops(inputs, ops, outputs)
