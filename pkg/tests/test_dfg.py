import random
from fractions import Fraction

import pytest
from hypothesis import given, settings

from hlsched.dfg import (
    Dfg,
    Edge,
    LatencyModel,
    Node,
    NodeClass,
    OpKind,
    critical_path_length,
    dump_dfg,
    evaluate,
    fixture_meta,
    load_fixture,
    parse_dfg,
    topo_order,
    validate,
)
from hlsched.errors import (
    CyclicGraph,
    MissingInput,
    ParseError,
    UnschedulableNode,
    ValidationError,
)

from oracles import interpret, longest_path
from strategies import dags


def test_op_kind_flags():
    assert OpKind.ADD.associative and OpKind.MUL.associative
    assert not any(k.associative for k in (OpKind.SUB, OpKind.NEG, OpKind.COPY))
    assert OpKind.NEG.arity == 1 and OpKind.SUB.arity == 2


def test_fixtures_validate(chain4, diamond, ewf):
    for g in (chain4, diamond, ewf):
        assert validate(g) == []


def test_self_loop_is_a_cycle():
    g = Dfg.from_ops(["x"], [("n1", "add", ["x", "n1"])], ["n1"])
    assert any(v.startswith("cycle") for v in validate(g))
    with pytest.raises(CyclicGraph):
        topo_order(g)


def test_unfed_port():
    g = Dfg((Node(0, "a", NodeClass.OPERATIONAL, OpKind.ADD),), (Edge("x", "a", 0),), ("x",), ("a",))
    assert "unfed port 1 on node 'a'" in validate(g)


@pytest.mark.parametrize(
    "edges, expected",
    [
        ([Edge("x", "a", 0), Edge("x", "a", 0), Edge("x", "a", 1)], "duplicate port 0"),
        ([Edge("x", "a", 0), Edge("zz", "a", 1)], "dangling reference 'zz'"),
        ([Edge("x", "a", 0), Edge("x", "a", 1), Edge("x", "a", 2)], "unexpected port 2"),
    ],
)
def test_port_violations(edges, expected):
    g = Dfg((Node(0, "a", op=OpKind.ADD),), tuple(edges), ("x",), ("a",))
    assert any(expected in v for v in validate(g))


def test_dangling_output_and_duplicate_name():
    g = Dfg(
        (Node(0, "a", op=OpKind.NEG), Node(1, "a", op=OpKind.NEG)),
        (Edge("x", "a", 0),),
        ("x",),
        ("q",),
    )
    found = validate(g)
    assert any("duplicate node name" in v for v in found)
    assert any("'q' in outputs" in v for v in found)


def test_unreachable_node():
    g = Dfg(
        (Node(0, "a", op=OpKind.NEG), Node(1, "b", NodeClass.CALL)),
        (Edge("x", "a", 0),),
        ("x",),
        ("a",),
    )
    assert any("unreachable" in v for v in validate(g))


def test_topo_order_fixtures(chain4, diamond):
    assert topo_order(chain4) == ["n1", "n2", "n3", "n4"]
    assert topo_order(diamond) == ["a", "b", "c", "d"]


def test_topo_order_ewf_respects_edges(ewf):
    order = topo_order(ewf)
    pos = {n: i for i, n in enumerate(order)}
    assert sorted(order) == sorted(ewf.names)
    assert all(pos[u] < pos[v] for u, v in ewf.node_edges())


def test_critical_path_fixtures(chain4, diamond, ewf):
    assert critical_path_length(chain4) == 4
    assert critical_path_length(diamond) == 3
    assert critical_path_length(ewf) == 14


def test_ewf_shape(ewf):
    assert len(ewf.nodes) == 34
    assert ewf.count(OpKind.ADD) == 26
    assert ewf.count(OpKind.MUL) == 8
    meta = fixture_meta("ewf")
    # meta values were computed by path enumeration when the fixture was written
    assert longest_path(ewf) == meta["critical_path_unit"] == 14
    mul2 = LatencyModel({OpKind.MUL: 2})
    weight = lambda n: mul2(ewf.node(n).op)  # noqa: E731
    assert longest_path(ewf, weight) == meta["critical_path_mul2"] == 17
    assert critical_path_length(ewf, mul2) == 17


def test_evaluate_fixtures(chain4, diamond):
    out = evaluate(diamond, {"x1": 1, "x2": 2, "x3": 3, "x4": 4})
    assert out == {"d": 16}
    assert evaluate(chain4, dict.fromkeys(chain4.inputs, 1)) == {"n4": 5}


def test_evaluate_missing_input(diamond):
    with pytest.raises(MissingInput):
        evaluate(diamond, {"x1": 1})


def test_evaluate_ewf_matches_reference(ewf):
    rng = random.Random(7)
    for _ in range(20):
        env = {x: Fraction(rng.randint(-50, 50), rng.randint(1, 9)) for x in ewf.inputs}
        assert evaluate(ewf, env) == interpret(ewf, env)


def test_evaluate_diamond_intermediates(diamond):
    # a=3, b=9, c=7, d=16 for x=1..4
    probe = Dfg(diamond.nodes, diamond.edges, diamond.inputs, ("a", "b", "c", "d"))
    assert evaluate(probe, {"x1": 1, "x2": 2, "x3": 3, "x4": 4}) == {"a": 3, "b": 9, "c": 7, "d": 16}


@settings(max_examples=150, deadline=None)
@given(dags(max_ops=10, kinds=(OpKind.ADD, OpKind.MUL, OpKind.SUB, OpKind.NEG)))
def test_graph_properties(g):
    assert validate(g) == []
    order = topo_order(g)
    pos = {n: i for i, n in enumerate(order)}
    assert all(pos[u] < pos[v] for u, v in g.node_edges())
    lat = LatencyModel({OpKind.MUL: 2})
    weight = lambda n: lat(g.node(n).op)  # noqa: E731
    cp = critical_path_length(g, lat)
    assert cp == longest_path(g, weight)
    assert cp <= sum(weight(n) for n in g.names)
    env = {x: Fraction(i + 2, 3) for i, x in enumerate(g.inputs)}
    assert evaluate(g, env) == evaluate(g, env) == interpret(g, env)


def test_round_trip_fixtures(chain4, diamond, ewf):
    for g in (chain4, diamond, ewf):
        assert parse_dfg(dump_dfg(g)) == g


def test_parse_errors():
    with pytest.raises(ParseError, match="line"):
        parse_dfg("{\n\"inputs\": [\n")
    with pytest.raises(ParseError, match=r"nodes\[0\]\.op"):
        parse_dfg('{"inputs":["x"],"nodes":[{"name":"a","op":"div"}],"edges":[],"outputs":[]}')
    dup = (
        '{"inputs":["x"],"nodes":[{"name":"a","op":"neg"},{"name":"a","op":"neg"}],'
        '"edges":[{"from":"x","to":"a","port":0}],"outputs":["a"]}'
    )
    with pytest.raises(ValidationError, match="duplicate node name"):
        parse_dfg(dup)


def test_non_operational_nodes_parse():
    text = (
        '{"inputs":["x"],"nodes":[{"name":"s","class":"storage"},{"name":"c","class":"call"}],'
        '"edges":[{"from":"x","to":"s","port":0},{"from":"s","to":"c","port":0}],"outputs":["s"]}'
    )
    g = parse_dfg(text)
    assert g.node("c").cls is NodeClass.CALL
    with pytest.raises(UnschedulableNode):
        evaluate(g, {"x": 3})
    storage_only = Dfg(g.nodes[:1], g.edges[:1], g.inputs, g.outputs)
    assert evaluate(storage_only, {"x": 3}) == {"s": 3}
