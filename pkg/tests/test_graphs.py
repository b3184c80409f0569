"""Hypergraph construction from canonical ASTs."""

import pytest

from hdhgn import ast_io
from hdhgn.graphs import HDHGraph, Hyperedge, build_hdhg, validate_hdhg
from hdhgn.errors import MalformedAst

from fixtures_data import a_eq_1_record, single_node_record, two_statement_module_record


def _graph(obj):
    return build_hdhg(ast_io.ast_from_obj(obj))


def test_a_eq_1_exact_structure():
    g = _graph(a_eq_1_record())
    assert g.nodes == [
        ("ast", "Module"),
        ("ast", "Assign"),
        ("ast", "Name"),
        ("identifier", "a"),
        ("ast", "Store"),
        ("ast", "Constant"),
        ("identifier", "1"),
    ]
    assert g.edges == [
        Hyperedge("body", (1,), 0),
        Hyperedge("targets", (2,), 1),
        Hyperedge("value", (5,), 1),
        Hyperedge("id", (3,), 2),
        Hyperedge("ctx", (4,), 2),
        Hyperedge("value", (6,), 5),
    ]
    assert g.label == 0
    validate_hdhg(g)


def test_single_node_graph_has_no_edges():
    g = _graph(single_node_record())
    assert len(g.nodes) == 1
    assert g.edges == []
    validate_hdhg(g)


def test_multi_child_field_becomes_one_hyperedge():
    g = _graph(two_statement_module_record())
    assert g.edges == [Hyperedge("body", (1, 2), 0)]
    validate_hdhg(g)


def test_edge_count_matches_nonempty_field_pairs_and_tail_sum():
    ast = ast_io.ast_from_obj(a_eq_1_record())
    g = build_hdhg(ast)
    field_pairs = sum(len(n.fields) for n in ast.nodes)
    assert len(g.edges) == field_pairs
    assert sum(len(e.tails) for e in g.edges) == len(g.nodes) - 1


def test_build_rejects_dangling_index():
    obj = single_node_record()
    obj["nodes"][0]["fields"] = [["body", [3]]]
    with pytest.raises(MalformedAst):
        _graph(obj)


def test_build_rejects_identifier_with_children():
    obj = a_eq_1_record()
    obj["nodes"][6]["fields"] = [["oops", [4]]]
    with pytest.raises(MalformedAst):
        _graph(obj)


def test_validate_hdhg_rejects_head_in_tail():
    g = HDHGraph(
        nodes=[("ast", "A"), ("ast", "B")],
        edges=[Hyperedge("f", (0, 1), 0)],
        label=None,
    )
    with pytest.raises(MalformedAst):
        validate_hdhg(g)


def test_validate_hdhg_rejects_duplicate_tails():
    g = HDHGraph(
        nodes=[("ast", "A"), ("ast", "B")],
        edges=[Hyperedge("f", (1, 1), 0)],
        label=None,
    )
    with pytest.raises(MalformedAst):
        validate_hdhg(g)
