import pytest

from dgcsp.reductions import LevelingFailure, compute_levels
from dgcsp.structures import (Digraph, EmptyRelationError,
                              InvalidStructureError, OrientedPathSpec,
                              RelationalStructure,
                              collapse_to_single_relation, digraph_to_dot,
                              product_digraph, tuple_name)
from dgcsp.templates import leq_template, two_cycle


def test_structure_normalizes_names_and_tuples():
    s = RelationalStructure([0, 1], [("E", 2, [(0, 1), (1, 0), (0, 1)])])
    assert s.domain == ("0", "1")
    assert s.relation("E").tuples == (("0", "1"), ("1", "0"))


def test_structure_rejects_bad_tuples():
    with pytest.raises(InvalidStructureError):
        RelationalStructure(["a"], [("R", 2, [("a",)])])
    with pytest.raises(InvalidStructureError):
        RelationalStructure(["a"], [("R", 1, [("b",)])])
    with pytest.raises(InvalidStructureError):
        RelationalStructure(["a", "a"], [("R", 1, [("a",)])])


def test_structure_json_round_trip():
    s = leq_template()
    again = RelationalStructure.from_json(s.to_json())
    assert again.domain == s.domain
    assert again.relations == s.relations


def test_structure_from_json_rejects_empty_relation():
    with pytest.raises(EmptyRelationError):
        RelationalStructure.from_json(
            {"domain": ["a"], "relations": [{"name": "R", "arity": 1,
                                            "tuples": []}]})


def test_digraph_basics():
    g = Digraph(["b", "a", "c"], [("a", "b"), ("b", "c"), ("a", "b")])
    assert g.vertices == ("b", "a", "c")
    assert g.num_edges() == 2
    assert g.out_neighbors("a") == ("b",)
    assert g.in_neighbors("c") == ("b",)
    assert g.has_edge("b", "c") and not g.has_edge("c", "b")
    with pytest.raises(InvalidStructureError):
        Digraph(["a"], [("a", "z")])


def test_digraph_weak_components_ignore_direction():
    g = Digraph(["a", "b", "c", "d", "e"],
                [("b", "a"), ("c", "b"), ("e", "d")])
    comps = g.weak_components()
    assert [sorted(c) for c in comps] == [["a", "b", "c"], ["d", "e"]]


def test_induced_subgraph_keeps_order():
    g = Digraph(["x", "y", "z"], [("x", "y"), ("y", "z")])
    h = g.induced(["z", "x", "y"])
    assert h.vertices == ("x", "y", "z")
    assert h.edges == g.edges


def test_digraph_as_structure_and_back():
    g = two_cycle()
    d = Digraph(g.domain, g.relation("E").tuples)
    s = d.as_structure()
    assert s.relation("E").tuples == d.edges
    assert Digraph.from_json(d.to_json()) == d


def test_compute_levels_normalizes_per_component():
    g = Digraph(["a", "b", "p", "q", "r"],
                [("a", "b"), ("p", "q"), ("q", "r")])
    lv = compute_levels(g)
    assert not isinstance(lv, LevelingFailure)
    assert lv[("a")] == 0 and lv["b"] == 1
    assert lv["p"] == 0 and lv["r"] == 2
    assert lv.height == 2


def test_compute_levels_detects_imbalance():
    # a 3-cycle cannot climb one level per edge
    g = Digraph(["a", "b", "c"], [("a", "b"), ("b", "c"), ("c", "a")])
    out = compute_levels(g)
    assert isinstance(out, LevelingFailure)
    assert out.reason == "not balanced"


def test_collapse_concatenates_relations():
    s = RelationalStructure(
        ["0", "1"],
        [("P", 1, [("0",), ("1",)]), ("E", 2, [("0", "1")])])
    col = collapse_to_single_relation(s)
    assert col.arity == 3
    assert col.offsets == (0, 1)
    assert set(col.relation.tuples) == {("0", "0", "1"), ("1", "0", "1")}


def test_collapse_passes_single_relation_through():
    s = two_cycle()
    col = collapse_to_single_relation(s)
    assert col.structure is s
    assert col.relation.name == "E"


def test_oriented_path_spec_levels_and_realize():
    spec = OrientedPathSpec((1, -1, 1))      # up, down, up
    assert spec.levels() == (0, 1, 0, 1)
    g = spec.realize(prefix="v")
    assert g.vertices == ("v0", "v1", "v2", "v3")
    assert set(g.edges) == {("v0", "v1"), ("v2", "v1"), ("v2", "v3")}


def test_product_digraph_squares_edge_count():
    g = Digraph(["a", "b"], [("a", "b")])
    sq = product_digraph(g, 2)
    assert sq.num_vertices() == 4
    assert sq.edges == ((tuple_name(("a", "a")), tuple_name(("b", "b"))),)


def test_dot_output_mentions_every_vertex():
    g = Digraph(["u", "v"], [("u", "v")])
    lv = compute_levels(g)
    dot = digraph_to_dot(g, levels=lv)
    assert '"u" -> "v";' in dot
    assert "rank=same" in dot
    assert dot.endswith("}\n")
