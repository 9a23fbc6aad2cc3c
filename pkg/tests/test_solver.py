import itertools

import pytest

from dgcsp.solver import (BudgetExhausted, HomInstance, SolverUsageError,
                          count_homomorphisms, digraph_hom,
                          digraph_hom_exists, enumerate_homomorphisms,
                          find_homomorphism)
from dgcsp.structures import Digraph, RelationalStructure
from dgcsp.templates import leq_template, two_cycle


def cycle_instance(n):
    vs = [f"c{i}" for i in range(n)]
    edges = [(vs[i], vs[(i + 1) % n]) for i in range(n)]
    return RelationalStructure(vs, [("E", 2, edges)])


def test_even_cycle_maps_to_two_cycle():
    hom = find_homomorphism(cycle_instance(4), two_cycle())
    assert hom is not None
    assert hom["c0"] != hom["c1"]


def test_odd_cycle_does_not():
    assert find_homomorphism(cycle_instance(5), two_cycle()) is None


def test_hom_is_verified_against_all_relations():
    """A found map must satisfy every constraint, not just the arcs the
    propagator happened to look at."""
    s = RelationalStructure(
        ["x", "y"],
        [("E", 2, [("x", "y")]), ("P", 1, [("x",)])])
    t = RelationalStructure(
        ["0", "1"],
        [("E", 2, [("0", "1"), ("1", "0")]), ("P", 1, [("0",)])])
    hom = find_homomorphism(s, t)
    assert hom == {"x": "0", "y": "1"}


def test_pins_are_respected():
    inst = cycle_instance(4)
    hom = find_homomorphism(inst, two_cycle(), pins={"c0": "1"})
    assert hom["c0"] == "1"
    assert find_homomorphism(inst, two_cycle(),
                             pins={"c0": "0", "c1": "0"}) is None


def test_unknown_pin_is_a_usage_error():
    with pytest.raises(SolverUsageError):
        find_homomorphism(cycle_instance(4), two_cycle(), pins={"zz": "0"})


def test_signature_mismatch_is_a_usage_error():
    s = RelationalStructure(["x"], [("Q", 1, [("x",)])])
    with pytest.raises(SolverUsageError):
        find_homomorphism(s, two_cycle())


def test_domain_restriction():
    s = RelationalStructure(["x", "y"], [("E", 2, [("x", "y")])])
    hom = find_homomorphism(s, leq_template(), domains={"x": ["1"]})
    assert hom == {"x": "1", "y": "1"}


def test_count_matches_brute_force():
    inst = cycle_instance(6)
    t = two_cycle()
    rel = t.relation("E").tuples
    brute = 0
    for vals in itertools.product(t.domain, repeat=6):
        assign = dict(zip(inst.domain, vals))
        if all((assign[u], assign[v]) in rel
               for u, v in inst.relation("E").tuples):
            brute += 1
    assert count_homomorphisms(inst, t) == brute == 2


def test_enumeration_is_deterministic():
    inst = cycle_instance(4)
    a = enumerate_homomorphisms(inst, leq_template())
    b = enumerate_homomorphisms(inst, leq_template())
    assert a == b
    assert all(x == a[0] or x != a[0] for x in a)
    # canonical order: first solution is the lexicographically least
    assert a[0] == {v: "0" for v in inst.domain}


def test_budget_exhaustion_raises():
    vs = [f"v{i}" for i in range(30)]
    inst = RelationalStructure(vs, [("E", 2, [(v, v) for v in vs])])
    with pytest.raises(BudgetExhausted):
        find_homomorphism(inst, leq_template(), budget=3)


def test_digraph_wrappers():
    g = Digraph(["a", "b"], [("a", "b"), ("b", "a")])
    h = Digraph(["0", "1"], [("0", "1"), ("1", "0")])
    assert digraph_hom_exists(g, h)
    m = digraph_hom(g, h, pins={"a": "1"})
    assert m == {"a": "1", "b": "0"}


def test_hom_instance_solve_all_limit():
    inst = HomInstance(cycle_instance(4), two_cycle())
    assert len(inst.solve_all()) == 2
    assert len(inst.solve_all(limit=1)) == 1
