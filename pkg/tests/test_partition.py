from hypothesis import given, settings
from hypothesis import strategies as st

from hlsched.allocation import clique_partition, op_compatibility
from hlsched.dfg import Dfg, OpKind, critical_path_length
from hlsched.partition import (
    CostModel,
    Side,
    buffer_size,
    crossing_edges,
    edge_cut,
    partition_by_clique,
    partition_by_cycles,
    partition_metrics,
    partition_to_dict,
    system_delay,
)
from hlsched.schedule import ResourceConstraints, asap, mbs

from oracles import longest_path
from strategies import budgets, dags

HW, SW = Side.HW, Side.SW
MUL4_COST = CostModel(sw_cycles={OpKind.ADD: 1, OpKind.MUL: 4}, transfer_cycles=2)


def only_b(g):
    return {n: HW if n == "b" else SW for n in g.names}


def flip(p):
    return {n: s.other() for n, s in p.items()}


def test_cycles_threshold(diamond):
    assert partition_by_cycles(diamond, MUL4_COST, 2) == only_b(diamond)
    assert set(partition_by_cycles(diamond, MUL4_COST, 0).values()) == {HW}
    p = partition_by_cycles(diamond, MUL4_COST, float("inf"))
    assert set(p.values()) == {SW} and edge_cut(diamond, p) == 0


def test_edge_cut_diamond(diamond):
    p = only_b(diamond)
    assert sorted(crossing_edges(diamond, p)) == [("a", "b"), ("b", "d")]
    assert edge_cut(diamond, p) == edge_cut(diamond, flip(p)) == 2


def test_buffer_diamond(diamond):
    assert buffer_size(diamond, asap(diamond), only_b(diamond)) == (2, 4)
    one_side = dict.fromkeys(diamond.names, SW)
    assert buffer_size(diamond, asap(diamond), one_side) == (0, 0)


def test_delay_diamond(diamond):
    p = only_b(diamond)
    delay, comm = system_delay(diamond, p, MUL4_COST)
    assert (delay, comm) == (7, 4)
    cost = lambda n: MUL4_COST.cycles(diamond.kind(n), p[n])  # noqa: E731
    hop = lambda u, v: MUL4_COST.transfer_cycles if p[u] is not p[v] else 0  # noqa: E731
    assert longest_path(diamond, cost, hop) == 7


def test_delay_reduces_to_critical_path(chain4, diamond, ewf):
    unit = CostModel(sw_cycles={}, transfer_cycles=0)
    for g in (chain4, diamond, ewf):
        assert system_delay(g, dict.fromkeys(g.names, SW), unit)[0] == critical_path_length(g)
        mixed = {n: (HW if i % 2 else SW) for i, n in enumerate(g.names)}
        assert system_delay(g, mixed, unit)[0] == critical_path_length(g)


def test_zero_transfer_delay_independent_of_cut(diamond):
    cost = CostModel(transfer_cycles=0)
    a = system_delay(diamond, only_b(diamond), cost)
    b = system_delay(diamond, dict.fromkeys(diamond.names, HW), cost)
    assert a[0] == b[0] and a[1] == 0


def test_clique_single_and_pair():
    g = Dfg.from_ops(["x"], [("p", "add", ["x", "x"]), ("q", "add", ["p", "x"])], ["q"])
    p = partition_by_clique(g, asap(g))
    assert len(set(p.values())) == 1
    g = Dfg.from_ops(
        ["x"],
        [("a1", "add", ["x", "x"]), ("a2", "add", ["a1", "x"]),
         ("m1", "mul", ["x", "x"]), ("m2", "mul", ["m1", "x"])],
        ["a2", "m2"],
    )
    p = partition_by_clique(g, asap(g), CostModel(sw_cycles={}))
    assert p["a1"] is p["a2"] and p["m1"] is p["m2"] and p["a1"] is not p["m1"]


@settings(max_examples=100, deadline=None)
@given(dags(max_ops=8), budgets)
def test_clique_balance(g, budget):
    cost = CostModel()
    s = mbs(g, rc=ResourceConstraints.of(**budget))
    p = partition_by_clique(g, s, cost)
    cliques = clique_partition(op_compatibility(g, s))
    assert all(len({p[n] for n in c}) == 1 for c in cliques)
    load = {HW: 0, SW: 0}
    for n in g.names:
        load[p[n]] += cost.sw(g.kind(n))
    biggest = max(sum(cost.sw(g.kind(n)) for n in c) for c in cliques)
    assert abs(load[HW] - load[SW]) <= biggest


@settings(max_examples=150, deadline=None)
@given(dags(max_ops=10), st.data())
def test_metric_invariants(g, data):
    p = {n: data.draw(st.sampled_from([HW, SW])) for n in g.names}
    s = asap(g)
    m = partition_metrics(g, s, p, MUL4_COST)
    assert min(m.edge_cut, m.buffer_peak, m.buffer_total, m.delay, m.comm_cost) >= 0
    assert m.edge_cut == edge_cut(g, flip(p))
    if len(set(p.values())) == 1:
        assert m.edge_cut == 0
    crossing_values = {u for u, _ in crossing_edges(g, p)}
    assert m.buffer_peak <= len(crossing_values)
    if m.edge_cut:
        assert m.buffer_peak <= m.buffer_total
    else:
        assert (m.buffer_peak, m.buffer_total) == (0, 0)
    assert m.comm_cost == m.edge_cut * MUL4_COST.transfer_cycles
    cost = lambda n: MUL4_COST.cycles(g.kind(n), p[n])  # noqa: E731
    hop = lambda u, v: MUL4_COST.transfer_cycles if p[u] is not p[v] else 0  # noqa: E731
    assert m.delay == longest_path(g, cost, hop)


def test_partition_json(diamond):
    p = only_b(diamond)
    m = partition_metrics(diamond, asap(diamond), p, MUL4_COST)
    assert partition_to_dict(diamond, "cycles", p, m) == {
        "strategy": "cycles",
        "sides": {"a": "sw", "b": "hw", "c": "sw", "d": "sw"},
        "edge_cut": 2,
        "buffer_peak": 2,
        "buffer_total": 4,
        "delay": 7,
        "comm_cost": 4,
    }
