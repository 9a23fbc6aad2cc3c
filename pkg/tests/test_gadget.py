import pytest

from dgcsp.gadget import (GadgetDigraph, build_gadget, build_path,
                          count_formula, elem_name, path_hom_exists,
                          path_position_map, tup_name)
from dgcsp.structures import InvalidStructureError, SizeGuardError
from dgcsp.templates import one_element, parity_template, two_cycle


def test_count_formula_pinned_values():
    assert count_formula(2, 2, 2) == (24, 24)
    assert count_formula(2, 4, 4) == (78, 80)
    assert count_formula(1, 1, 1) == (4, 3)


def test_path_shape():
    p = build_path({1, 3}, 3)
    # one initial edge, sections 1 and 3 single, section 2 a zigzag,
    # one final edge
    assert p.num_vertices == 3 * 3 + 2 - 2 * 2 + 1
    assert p.is_single(1) and not p.is_single(2) and p.is_single(3)
    lv = p.levels()
    assert lv[0] == 0 and lv[-1] == 5
    assert max(lv) == 5


def test_path_rejects_bad_coordinates():
    with pytest.raises(InvalidStructureError):
        build_path({0}, 2)
    with pytest.raises(InvalidStructureError):
        build_path({3}, 2)


def test_path_embedding_iff_subset():
    a = build_path({1}, 2)
    b = build_path({1, 2}, 2)
    ok, pm = path_hom_exists(a, b)
    assert ok
    assert pm[0] == 0 and pm[-1] == b.last_position
    back, _ = path_hom_exists(b, a)
    assert not back


def test_position_map_folds_zigzag_onto_single_edge():
    src = build_path(set(), 1)          # single zigzag section
    dst = build_path({1}, 1)
    pm = path_position_map(src, dst)
    # seams at both ends, zigzag interior folded onto the single edge
    lo, hi = dst.section_spans[0]
    inner = pm[src.section_spans[0][0]:src.section_spans[0][1] + 1]
    assert inner == (lo, hi, lo, hi)


def test_position_map_is_level_preserving():
    src = build_path(set(), 3)
    dst = build_path({2}, 3)
    pm = path_position_map(src, dst)
    src_lv, dst_lv = src.levels(), dst.levels()
    assert all(src_lv[i] == dst_lv[pm[i]] for i in range(src.num_vertices))


@pytest.fixture(scope="module")
def gadget():
    return build_gadget(two_cycle())


class TestTwoCycleGadget:

    def test_counts(self, gadget):
        assert gadget.digraph.num_vertices() == 24
        assert gadget.digraph.num_edges() == 24

    def test_every_edge_climbs_one_level(self, gadget):
        for u, v in gadget.digraph.edges:
            assert gadget.levels[v] == gadget.levels[u] + 1

    def test_endpoint_vertices(self, gadget):
        for a in gadget.template.domain:
            assert gadget.levels[elem_name(a)] == 0
        for r in gadget.relation.tuples:
            assert gadget.levels[tup_name(r)] == gadget.height

    def test_one_path_per_element_tuple_pair(self, gadget):
        assert len(gadget.paths) == 4
        for (a, r), path in gadget.paths.items():
            assert path.vertices[0] == elem_name(a)
            assert path.vertices[-1] == tup_name(r)
            singles = frozenset(i + 1 for i, x in enumerate(r) if x == a)
            assert path.qpath.single_edges == singles

    def test_peaks_and_valleys(self, gadget):
        g = gadget.digraph
        for v in g.vertices:
            info = gadget.vertex_info[v]
            if info.kind != "path":
                continue
            if not g.out_neighbors(v):
                # a peak: entered from both sides, strictly interior level
                assert len(g.in_neighbors(v)) == 2
                assert 2 <= info.level <= gadget.k + 1
            if not g.in_neighbors(v):
                assert len(g.out_neighbors(v)) == 2
                assert 1 <= info.level <= gadget.k


def test_parity_gadget_counts():
    gad = build_gadget(parity_template())
    assert (gad.digraph.num_vertices(), gad.digraph.num_edges()) == (78, 80)


def test_one_element_gadget_counts():
    gad = build_gadget(one_element())
    assert (gad.digraph.num_vertices(), gad.digraph.num_edges()) == (4, 3)


def test_size_guard():
    with pytest.raises(SizeGuardError):
        GadgetDigraph(two_cycle(), max_pairs=3)


def test_multi_relation_template_is_rejected():
    from dgcsp.structures import RelationalStructure
    s = RelationalStructure(
        ["0"], [("P", 1, [("0",)]), ("Q", 1, [("0",)])])
    with pytest.raises(InvalidStructureError):
        build_gadget(s)
