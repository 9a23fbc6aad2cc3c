"""Reductions between instance solving and gadget-digraph solving.

Forward direction: an instance X over a template A becomes a digraph G
with G -> D(A) iff X -> A.  Every variable sits at level 0; every
collapsed constraint gets a fresh top vertex, connected to each variable
in its block by a connecting path that records the variable's coordinate.

Backward direction: an arbitrary digraph G is reduced against D(A) in
stages.  Stage 1 rejects digraphs that are not balanced or are taller
than the gadget.  Stage 2 solves components shorter than the gadget
outright and drops them.  Stage 3 looks at each remaining component's
interior pieces: for each piece, the set of coordinates it blocks is
computed with the solver, and those blocked coordinates are compiled
into generalized hyperedges plus forced equalities, which are then
amalgamated into an instance B over A's collapsed signature with
G -> D(A) iff B -> A.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

from .gadget import build_gadget, build_path
from .solver import DEFAULT_BUDGET, digraph_hom
from .structures import (
    Digraph,
    InvalidStructureError,
    LevelAssignment,
    RelationalStructure,
    collapse_to_single_relation,
)


class TemplateTrivialError(ValueError):
    """The template is satisfied by a constant map, so no unsatisfiable
    instance over it exists and a definite NO cannot be materialized."""


class FreshNames:
    """Monotone counter for fresh names that never collides with a
    reserved set (or with names it already handed out)."""

    def __init__(self, reserved=(), prefix="x", start=1):
        self._taken = set(reserved)
        self._prefix = prefix
        self._n = start

    def reserve(self, names):
        self._taken.update(names)

    def next(self):
        while True:
            cand = f"{self._prefix}{self._n}"
            self._n += 1
            if cand not in self._taken:
                self._taken.add(cand)
                return cand


class UnionFind:
    """Plain union-find over hashable keys with path compression."""

    def __init__(self):
        self._parent = {}

    def add(self, x):
        if x not in self._parent:
            self._parent[x] = x

    def find(self, x):
        self.add(x)
        root = x
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[x] != root:
            self._parent[x], x = root, self._parent[x]
        return root

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self._parent[ry] = rx
        return rx


# ---------------------------------------------------------------------
# leveling


@dataclass(frozen=True)
class LevelingFailure:
    reason: str                 # "not balanced" or "too tall"
    detail: str


def compute_levels(g, max_height=None):
    """Level function of a digraph, or why there is none.

    Every edge must go from level l to level l+1; levels are normalized
    to minimum 0 on each weak component.  Returns a
    :class:`LevelAssignment` or a :class:`LevelingFailure` (when the
    digraph is not balanced, or exceeds ``max_height``).
    """
    levels = {}
    height = 0
    for comp in g.weak_components():
        start = comp[0]
        tentative = {start: 0}
        stack = [start]
        while stack:
            v = stack.pop()
            for w in g.out_neighbors(v):
                if w in tentative:
                    if tentative[w] != tentative[v] + 1:
                        return LevelingFailure(
                            "not balanced",
                            f"edge ({v}, {w}) closes an unbalanced cycle")
                else:
                    tentative[w] = tentative[v] + 1
                    stack.append(w)
            for w in g.in_neighbors(v):
                if w in tentative:
                    if tentative[w] != tentative[v] - 1:
                        return LevelingFailure(
                            "not balanced",
                            f"edge ({w}, {v}) closes an unbalanced cycle")
                else:
                    tentative[w] = tentative[v] - 1
                    stack.append(w)
        low = min(tentative.values())
        for v, l in tentative.items():
            levels[v] = l - low
        height = max(height, max(tentative.values()) - low)
    if max_height is not None and height > max_height:
        return LevelingFailure(
            "too tall", f"height {height} exceeds bound {max_height}")
    return LevelAssignment(levels, height)


# ---------------------------------------------------------------------
# forward reduction


@dataclass(frozen=True)
class ForwardReduction:
    digraph: Digraph
    collapsed: object           # CollapsedTemplate
    tops: tuple                 # one top vertex per collapsed constraint


def forward_translate(instance, template):
    """Compile an instance over a template into a digraph.

    The instance's variables become level-0 vertices under their own
    names; everything else is fresh.  The output digraph maps to the
    template's gadget iff the instance maps to the template.
    """
    col = collapse_to_single_relation(template)
    k = col.arity
    sig = template.signature()
    for r in instance.relations:
        if r.name not in sig or sig[r.name] != r.arity:
            raise InvalidStructureError(
                f"instance relation {r.name!r} does not match the template")

    variables = list(instance.domain)
    fresh = FreshNames(reserved=variables, prefix="v")
    vertices = list(variables)
    edges = []
    tops = []

    def add_path_copy(qpath, bottom, top):
        names = [bottom]
        names.extend(fresh.next() for _ in range(qpath.last_position - 1))
        names.append(top)
        vertices.extend(names[1:-1])
        for j, d in enumerate(qpath.spec.word):
            if d > 0:
                edges.append((names[j], names[j + 1]))
            else:
                edges.append((names[j + 1], names[j]))

    rel_order = [r.name for r in template.relations]
    constrained = set()
    for rel_idx, rel_name in enumerate(rel_order):
        if not instance.has_relation(rel_name):
            continue
        for scope in instance.relation(rel_name).tuples:
            # block of the collapsed constraint: the scope sits in this
            # relation's slice, every other slice is padded fresh
            block = []
            for m, other in enumerate(rel_order):
                if m == rel_idx:
                    block.extend(scope)
                else:
                    block.extend(fresh.next()
                                 for _ in range(template.relation(other).arity))
            for v in block:
                if v not in instance.domain:
                    vertices.append(v)   # pad variable, level 0
            constrained.update(scope)
            top = fresh.next()
            vertices.append(top)
            tops.append(top)
            for i in range(1, k + 1):
                add_path_copy(build_path({i}, k), block[i - 1], top)

    for v in variables:
        if v not in constrained:
            top = fresh.next()
            vertices.append(top)
            tops.append(top)
            add_path_copy(build_path(set(), k), v, top)

    return ForwardReduction(Digraph(vertices, edges), col, tuple(tops))


# ---------------------------------------------------------------------
# backward reduction: interior pieces and their blocked coordinates


@dataclass(frozen=True)
class InternalComponent:
    """A weak component of the digraph with levels 0 and n removed.

    ``bases`` are the level-0 vertices with an edge into the piece,
    ``tops`` the level-n vertices with an edge from it;
    ``base_adjacent``/``top_adjacent`` are the piece vertices carrying
    those edges.  ``gamma`` is the set of blocked coordinates, filled in
    by :func:`forced_positions`.
    """

    vertices: tuple
    bases: tuple
    tops: tuple
    base_adjacent: tuple = ()
    top_adjacent: tuple = ()
    gamma: frozenset = None


def internal_components(g, levels, n):
    """Interior pieces of a leveled digraph of height n."""
    interior = [v for v in g.vertices if 0 < levels[v] < n]
    sub = g.induced(interior)
    out = []
    for comp in sub.weak_components():
        cset = set(comp)
        bases, tops = set(), set()
        base_adj, top_adj = set(), set()
        for c in comp:
            for u in g.in_neighbors(c):
                if levels[u] == 0:
                    bases.add(u)
                    base_adj.add(c)
            for w in g.out_neighbors(c):
                if levels[w] == n:
                    tops.add(w)
                    top_adj.add(c)
        if not bases and not tops:
            raise AssertionError(
                "interior piece with neither bases nor tops inside a "
                f"height-{n} component: {comp[:5]}...")
        key = g.index
        out.append(InternalComponent(
            tuple(comp),
            tuple(sorted(bases, key=key)),
            tuple(sorted(tops, key=key)),
            tuple(sorted(base_adj, key=key)),
            tuple(sorted(top_adj, key=key)),
        ))
    return out


def forced_positions(g, comp, k, budget=DEFAULT_BUDGET):
    """Coordinates i such that the piece cannot be mapped into the
    connecting path with coordinate i removed from the full set.

    Base-adjacent vertices are pinned next to the path's start,
    top-adjacent ones next to its end, so the piece is placed exactly as
    it would sit inside an instantiated path of the gadget.
    """
    sub = g.induced(comp.vertices)
    blocked = set()
    full = set(range(1, k + 1))
    for i in range(1, k + 1):
        qp = build_path(full - {i}, k)
        target = qp.realize(prefix="q")
        pins = {}
        for c in comp.base_adjacent:
            pins[c] = "q1"
        for c in comp.top_adjacent:
            pins[c] = f"q{qp.last_position - 1}"
        if digraph_hom(sub, target, pins=pins, budget=budget) is None:
            blocked.add(i)
    return frozenset(blocked)


# ---------------------------------------------------------------------
# backward reduction: hyperedge extraction and amalgamation


@dataclass(frozen=True)
class GeneralizedHyperedge:
    """A constraint scheme: entry sets per coordinate, optionally
    labelled by the level-n vertex it came from."""

    entries: tuple              # tuple of frozensets of names
    label: str = None

    @property
    def arity(self):
        return len(self.entries)


def extract_hyperedges(level_n, level_0, comps, k, fresh=None):
    """Compile interior pieces (with their blocked coordinates) into
    generalized hyperedges and equalities.

    One labelled hyperedge per level-n vertex e: coordinate i collects
    the bases of every piece topped by e that blocks i; a piece without
    bases contributes a single stand-in name, reused across all its
    blocked coordinates.  Coordinates nobody blocks get an independent
    fresh name.  One unlabelled hyperedge per (level-0 vertex b, topless
    piece based at b): b itself at the blocked coordinates, fresh names
    elsewhere.  Equalities identify all tops of a piece and all bases of
    a piece.
    """
    if fresh is None:
        reserved = set(level_n) | set(level_0)
        for c in comps:
            reserved.update(c.vertices)
            reserved.update(c.bases)
            reserved.update(c.tops)
        fresh = FreshNames(reserved=reserved, prefix="x")

    standins = {}

    def standin(ci):
        if ci not in standins:
            standins[ci] = fresh.next()
        return standins[ci]

    hyperedges = []
    for e in level_n:
        entries = []
        for i in range(1, k + 1):
            entry = set()
            for ci, comp in enumerate(comps):
                if e in comp.tops and i in comp.gamma:
                    if comp.bases:
                        entry.update(comp.bases)
                    else:
                        entry.add(standin(ci))
            if not entry:
                entry.add(fresh.next())
            entries.append(frozenset(entry))
        hyperedges.append(GeneralizedHyperedge(tuple(entries), label=e))

    for b in level_0:
        for comp in comps:
            if comp.tops or b not in comp.bases:
                continue
            entries = []
            for i in range(1, k + 1):
                if i in comp.gamma:
                    entries.append(frozenset({b}))
                else:
                    entries.append(frozenset({fresh.next()}))
            hyperedges.append(GeneralizedHyperedge(tuple(entries)))

    equalities = []
    for comp in comps:
        for a in range(len(comp.tops)):
            for b in range(a + 1, len(comp.tops)):
                equalities.append((comp.tops[a], comp.tops[b]))
    for comp in comps:
        for a in range(len(comp.bases)):
            for b in range(a + 1, len(comp.bases)):
                equalities.append((comp.bases[a], comp.bases[b]))

    return tuple(hyperedges), tuple(equalities)


def stage3a_to_json(hyperedges, equalities):
    hs = []
    for h in hyperedges:
        item = {"entries": [sorted(entry) for entry in h.entries]}
        if h.label is not None:
            item["label"] = h.label
        hs.append(item)
    return {"hyperedges": hs,
            "equalities": [list(eq) for eq in equalities]}


def stage3a_from_json(obj):
    if not isinstance(obj, dict):
        raise InvalidStructureError("hyperedge file must be a JSON object")
    try:
        hs = obj["hyperedges"]
        eqs = obj["equalities"]
    except (KeyError, TypeError):
        raise InvalidStructureError(
            "hyperedge file needs 'hyperedges' and 'equalities' keys") from None
    hyperedges = []
    for item in hs:
        entries = tuple(frozenset(str(x) for x in entry)
                        for entry in item["entries"])
        if not entries or any(not e for e in entries):
            raise InvalidStructureError("hyperedge with an empty entry")
        hyperedges.append(
            GeneralizedHyperedge(entries, label=item.get("label")))
    equalities = tuple((str(a), str(b)) for a, b in eqs)
    return tuple(hyperedges), equalities


@dataclass(frozen=True)
class AmalgamationResult:
    """The instance built from hyperedges plus the identification classes
    behind each of its variables."""

    structure: RelationalStructure
    classes: dict = field(compare=False)


def amalgamate(hyperedges, equalities, relation_name="R", arity=None):
    """Merge hyperedge entries along all forced identifications and
    produce the reduced instance.

    Names within one entry are identified, both sides of every equality
    are identified, and hyperedges whose labels were identified are
    merged coordinatewise.  Variables of the result are the
    identification classes of names that occur in entries; each
    hyperedge becomes one constraint tuple over those classes.
    """
    if not hyperedges:
        raise InvalidStructureError("no hyperedges to amalgamate")
    widths = {h.arity for h in hyperedges}
    if len(widths) != 1:
        raise InvalidStructureError(
            f"hyperedges have mixed widths {sorted(widths)}")
    width = widths.pop()
    if arity is not None and width != arity:
        raise InvalidStructureError(
            f"hyperedges have width {width}, expected {arity}")
    for h in hyperedges:
        if any(not entry for entry in h.entries):
            raise InvalidStructureError("hyperedge with an empty entry")

    uf = UnionFind()
    entry_names = set()
    for h in hyperedges:
        for entry in h.entries:
            members = sorted(entry)
            entry_names.update(members)
            for name in members[1:]:
                uf.union(members[0], name)
    for a, b in equalities:
        uf.union(a, b)

    # merge hyperedges that carry identified labels, coordinatewise;
    # repeat in case those merges identify further labels
    labelled = [h for h in hyperedges if h.label is not None]
    while True:
        groups = {}
        for h in labelled:
            groups.setdefault(uf.find(h.label), []).append(h)
        changed = False
        for group in groups.values():
            if len(group) < 2:
                continue
            lead = group[0]
            for other in group[1:]:
                for i in range(width):
                    a = next(iter(lead.entries[i]))
                    b = next(iter(other.entries[i]))
                    if uf.find(a) != uf.find(b):
                        uf.union(a, b)
                        changed = True
        if not changed:
            break

    members_by_root = {}
    for name in sorted(entry_names):
        members_by_root.setdefault(uf.find(name), []).append(name)
    classes = {}
    root_to_class = {}
    for root, members in members_by_root.items():
        cname = min(members)
        classes[cname] = frozenset(members)
        root_to_class[root] = cname

    tuples = []
    for h in hyperedges:
        tuples.append(tuple(root_to_class[uf.find(next(iter(entry)))]
                            for entry in h.entries))
    structure = RelationalStructure(
        sorted(classes), [(relation_name, width, tuples)])
    return AmalgamationResult(structure, classes)


# ---------------------------------------------------------------------
# the full backward pipeline


@dataclass(frozen=True)
class Definite:
    """The reduction already knows the answer."""

    answer: bool
    reason: str


@dataclass(frozen=True)
class Reduced:
    """The digraph question was rewritten as an instance question."""

    instance: RelationalStructure
    classes: dict = field(compare=False)
    hyperedges: tuple = ()
    equalities: tuple = ()
    collapsed: object = None
    components: tuple = ()


def backward_reduce(g, template, budget=DEFAULT_BUDGET):
    """Reduce "does G map to the template's gadget?" to an instance over
    the template, or decide it outright.

    Returns :class:`Definite` when stage 1 or 2 settles the question and
    :class:`Reduced` otherwise.
    """
    col = collapse_to_single_relation(template)
    gad = build_gadget(col.structure)
    n = gad.height
    k = gad.k

    levels = compute_levels(g, max_height=n)
    if isinstance(levels, LevelingFailure):
        return Definite(False, f"{levels.reason}: {levels.detail}")

    kept = []
    for comp in g.weak_components():
        h = max(levels[v] for v in comp)
        if h < n:
            sub = g.induced(comp)
            if digraph_hom(sub, gad.digraph, budget=budget) is None:
                return Definite(
                    False,
                    f"short component at {comp[0]!r} has no image in the gadget")
        else:
            kept.append(comp)
    if not kept:
        return Definite(True, "every component is short and embeddable")

    keep = [v for comp in kept for v in comp]
    g2 = g.induced(keep)

    comps = internal_components(g2, levels, n)
    comps = [dataclasses.replace(c, gamma=forced_positions(g2, c, k, budget))
             for c in comps]
    level_n = [v for v in g2.vertices if levels[v] == n]
    level_0 = [v for v in g2.vertices if levels[v] == 0]
    hyperedges, equalities = extract_hyperedges(level_n, level_0, comps, k)
    res = amalgamate(hyperedges, equalities,
                     relation_name=col.relation.name, arity=k)
    return Reduced(res.structure, res.classes, hyperedges, equalities,
                   col, tuple(comps))


def trivial_instance(template, variable="x0"):
    """The one-variable instance with every relation constraining it."""
    rels = [(r.name, r.arity, [(variable,) * r.arity])
            for r in template.relations]
    return RelationalStructure([variable], rels)


def materialize(outcome, template):
    """Turn a backward-reduction outcome into a concrete instance with
    the same answer.

    A definite YES becomes the collapsed template read as an instance
    (satisfied by the identity).  A definite NO becomes the one-variable
    instance demanding a constant tuple; if the template admits one, no
    unsatisfiable instance exists at all and this raises
    :class:`TemplateTrivialError`.
    """
    if isinstance(outcome, Reduced):
        return outcome.instance
    col = collapse_to_single_relation(template)
    if outcome.answer:
        return col.structure
    k1 = trivial_instance(col.structure)
    for t in col.relation.tuples:
        if len(set(t)) == 1:
            raise TemplateTrivialError(
                "template admits a constant tuple; every instance over it "
                "is satisfiable, so a NO outcome cannot be materialized")
    return k1
