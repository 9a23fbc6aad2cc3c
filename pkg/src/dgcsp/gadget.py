"""Connecting paths and the path-replacement gadget.

A single-relation template A (domain elements, one k-ary relation R) is
turned into a digraph D(A): one vertex per element at level 0, one per
relation tuple at level k+2, and for every element/tuple pair a
connecting path between them whose shape records the coordinate set
``{i : r_i = a}``.  Section i of a connecting path is a single climbing
edge when coordinate i is in the recorded set and a zigzag otherwise, so
paths embed into each other exactly when their recorded sets are nested.
"""

from __future__ import annotations

from dataclasses import dataclass

from .structures import (
    BACKWARD,
    FORWARD,
    Digraph,
    InvalidStructureError,
    LevelAssignment,
    OrientedPathSpec,
    SizeGuardError,
)


def count_formula(num_elements, num_tuples, arity):
    """Closed-form size of the gadget digraph: (vertices, edges)."""
    k = arity
    v = (3 * k + 1) * num_tuples * num_elements + (1 - 2 * k) * num_tuples \
        + num_elements
    e = (3 * k + 2) * num_tuples * num_elements - 2 * k * num_tuples
    return v, e


@dataclass(frozen=True)
class QPath:
    """A connecting path for coordinate set ``single_edges`` within 1..k.

    The path climbs from level 0 to level k+2: an initial single edge,
    one section per coordinate (single edge when the coordinate is in
    ``single_edges``, zigzag otherwise), and a final single edge.
    ``section_spans[l-1]`` is the inclusive position range of section l;
    adjacent sections share their seam position.
    """

    k: int
    single_edges: frozenset
    spec: OrientedPathSpec
    section_spans: tuple

    @property
    def last_position(self):
        return len(self.spec.word)

    @property
    def num_vertices(self):
        return len(self.spec.word) + 1

    def levels(self):
        return self.spec.levels()

    def is_single(self, section):
        return section in self.single_edges

    def sections_at(self, position):
        """Sections whose span contains the position (seams are in two)."""
        out = []
        for l in range(1, self.k + 1):
            lo, hi = self.section_spans[l - 1]
            if lo <= position <= hi:
                out.append(l)
        return out

    def realize(self, names=None, prefix="p"):
        return self.spec.realize(names=names, prefix=prefix)


def build_path(single_edges, k):
    """The connecting path for a coordinate set within 1..k."""
    if k < 1:
        raise InvalidStructureError(f"arity must be at least 1, got {k}")
    single_edges = frozenset(int(i) for i in single_edges)
    if not single_edges <= set(range(1, k + 1)):
        raise InvalidStructureError(
            f"coordinate set {sorted(single_edges)} not within 1..{k}")
    word = [FORWARD]
    spans = []
    pos = 1
    for l in range(1, k + 1):
        lo = pos
        if l in single_edges:
            word.append(FORWARD)
            pos += 1
        else:
            word.extend((FORWARD, BACKWARD, FORWARD))
            pos += 3
        spans.append((lo, pos))
    word.append(FORWARD)
    return QPath(k, single_edges, OrientedPathSpec(tuple(word)), tuple(spans))


def path_position_map(src, dst):
    """Position map of the canonical embedding of one connecting path in
    another, or None when no embedding exists.

    An embedding exists iff the source's single-edge set is contained in
    the destination's.  It is unique: seams go to seams, single sections
    to single sections, zigzags onto zigzags identically, and a zigzag
    onto a single section by folding (local positions 0,2 -> 0 and
    1,3 -> 1).  Endpoints are preserved.
    """
    if src.k != dst.k:
        return None
    if not src.single_edges <= dst.single_edges:
        return None
    out = [0] * src.num_vertices
    for l in range(1, src.k + 1):
        (alo, ahi) = src.section_spans[l - 1]
        (blo, bhi) = dst.section_spans[l - 1]
        if src.is_single(l):
            out[alo] = blo
            out[ahi] = bhi
        elif not dst.is_single(l):
            for j in range(4):
                out[alo + j] = blo + j
        else:
            out[alo] = blo
            out[alo + 1] = bhi
            out[alo + 2] = blo
            out[alo + 3] = bhi
    out[src.last_position] = dst.last_position
    return tuple(out)


def path_hom_exists(src, dst):
    """Whether one connecting path maps into another with endpoints on
    endpoints; returns (exists, position map or None)."""
    pm = path_position_map(src, dst)
    return (pm is not None), pm


@dataclass(frozen=True)
class GadgetPath:
    """One instantiated connecting path inside the gadget digraph."""

    edge: tuple                 # (element, relation tuple)
    qpath: QPath
    vertices: tuple             # vertex names, position 0..last


def elem_name(a):
    return f"elem:{a}"


def tup_name(r):
    return "tup:(" + ",".join(r) + ")"


def _internal_name(a, r, j):
    return f"path:{a}|(" + ",".join(r) + f")|{j}"


class GadgetDigraph:
    """The gadget digraph of a single-relation template.

    Exposes the digraph itself, its level assignment, the ordered list of
    element/tuple pairs (the construction order, used as a tie-breaking
    order downstream), the instantiated path per pair, and per-vertex
    bookkeeping (kind, level, owning pair, path position).
    """

    def __init__(self, template, max_pairs=4096):
        if not template.is_single_relation:
            raise InvalidStructureError(
                "gadget construction needs a single-relation template; "
                "collapse first")
        rel = template.relations[0]
        if not rel.tuples:
            raise InvalidStructureError("template relation has no tuples")
        self.template = template
        self.relation = rel
        self.k = rel.arity

        pairs = len(template.domain) * len(rel.tuples)
        if pairs > max_pairs:
            raise SizeGuardError(
                f"gadget would use {pairs} connecting paths (bound {max_pairs})")

        self.edge_order = tuple(
            (a, r) for a in template.domain for r in rel.tuples)
        self.edge_index = {e: i for i, e in enumerate(self.edge_order)}

        vertices = [elem_name(a) for a in template.domain]
        vertices.extend(tup_name(r) for r in rel.tuples)
        levels = {elem_name(a): 0 for a in template.domain}
        levels.update({tup_name(r): self.k + 2 for r in rel.tuples})
        self.vertex_info = {}
        for a in template.domain:
            self.vertex_info[elem_name(a)] = VertexInfo("elem", 0, element=a)
        for r in rel.tuples:
            self.vertex_info[tup_name(r)] = VertexInfo(
                "tup", self.k + 2, rtuple=r)

        edges = []
        self.paths = {}
        for (a, r) in self.edge_order:
            coords = frozenset(i + 1 for i in range(self.k) if r[i] == a)
            qp = build_path(coords, self.k)
            names = [elem_name(a)]
            names.extend(_internal_name(a, r, j)
                         for j in range(1, qp.last_position))
            names.append(tup_name(r))
            qlevels = qp.levels()
            for j in range(1, qp.last_position):
                vertices.append(names[j])
                levels[names[j]] = qlevels[j]
                self.vertex_info[names[j]] = VertexInfo(
                    "path", qlevels[j], edge=(a, r), position=j)
            for j, d in enumerate(qp.spec.word):
                if d == FORWARD:
                    edges.append((names[j], names[j + 1]))
                else:
                    edges.append((names[j + 1], names[j]))
            self.paths[(a, r)] = GadgetPath((a, r), qp, tuple(names))

        if len(set(vertices)) != len(vertices):
            raise InvalidStructureError(
                "element names collide under gadget naming; rename them")
        self.digraph = Digraph(vertices, edges)
        self.levels = LevelAssignment(levels, self.k + 2)

        expect = count_formula(len(template.domain), len(rel.tuples), self.k)
        got = (self.digraph.num_vertices(), self.digraph.num_edges())
        if got != expect:
            raise AssertionError(
                f"gadget size {got} does not match the closed form {expect}")

    @property
    def height(self):
        return self.k + 2

    def structure(self):
        return self.digraph.as_structure()

    def level_of(self, v):
        return self.levels[v]


@dataclass(frozen=True)
class VertexInfo:
    kind: str                   # "elem" | "tup" | "path"
    level: int
    element: str = None
    rtuple: tuple = None
    edge: tuple = None
    position: int = None


def build_gadget(template, max_pairs=4096):
    return GadgetDigraph(template, max_pairs=max_pairs)
