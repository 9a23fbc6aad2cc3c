"""Relational structures, digraphs and oriented paths.

Everything downstream works over two kinds of objects: finite relational
structures (a domain plus named relations of fixed arity) and finite
digraphs.  Both are immutable once built and keep their contents in a
canonical order so that serialization and search are deterministic.

Element and vertex names are strings.  Relation tuples are stored as
tuples of element names, sorted by domain position.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field


class InvalidStructureError(ValueError):
    """Raised when a structure or digraph description is malformed."""


class EmptyRelationError(InvalidStructureError):
    """Raised when a parsed structure has no relations or an empty one."""


class SizeGuardError(ValueError):
    """Raised when a construction would exceed a configured size bound."""


@dataclass(frozen=True)
class Relation:
    """A named relation: a set of same-length tuples of element names."""

    name: str
    arity: int
    tuples: tuple[tuple[str, ...], ...]


class RelationalStructure:
    """A finite relational structure.

    The domain order is significant: it fixes tuple ordering, tie-breaking
    in searches and the edge order of the gadget construction.
    """

    def __init__(self, domain, relations):
        domain = tuple(str(x) for x in domain)
        if not domain:
            raise InvalidStructureError("domain must be nonempty")
        if len(set(domain)) != len(domain):
            raise InvalidStructureError("duplicate domain elements")
        self.domain = domain
        self._index = {name: i for i, name in enumerate(domain)}

        rels = []
        seen = set()
        for item in relations:
            if isinstance(item, Relation):
                name, arity, tuples = item.name, item.arity, item.tuples
            else:
                name, arity, tuples = item
            name = str(name)
            if name in seen:
                raise InvalidStructureError(f"duplicate relation name {name!r}")
            seen.add(name)
            if arity < 1:
                raise InvalidStructureError(f"relation {name!r} has arity {arity}")
            canon = set()
            for t in tuples:
                t = tuple(str(x) for x in t)
                if len(t) != arity:
                    raise InvalidStructureError(
                        f"tuple {t} does not match arity {arity} of {name!r}")
                for x in t:
                    if x not in self._index:
                        raise InvalidStructureError(
                            f"tuple element {x!r} not in domain")
                canon.add(t)
            ordered = tuple(sorted(canon, key=self._tuple_key))
            rels.append(Relation(name, int(arity), ordered))
        self.relations = tuple(rels)
        self._by_name = {r.name: r for r in self.relations}

    def _tuple_key(self, t):
        return tuple(self._index[x] for x in t)

    # -- basic queries -------------------------------------------------

    def index(self, name):
        return self._index[name]

    def __contains__(self, name):
        return name in self._index

    def relation(self, name):
        try:
            return self._by_name[name]
        except KeyError:
            raise KeyError(f"no relation named {name!r}") from None

    def has_relation(self, name):
        return name in self._by_name

    def signature(self):
        return {r.name: r.arity for r in self.relations}

    @property
    def is_single_relation(self):
        return len(self.relations) == 1

    def size(self):
        return len(self.domain)

    def __eq__(self, other):
        if not isinstance(other, RelationalStructure):
            return NotImplemented
        return self.domain == other.domain and self.relations == other.relations

    def __hash__(self):
        return hash((self.domain, self.relations))

    def __repr__(self):
        sig = ", ".join(f"{r.name}/{r.arity}:{len(r.tuples)}" for r in self.relations)
        return f"RelationalStructure(|dom|={len(self.domain)}, {sig})"

    # -- derived structures --------------------------------------------

    def induced(self, elements):
        """Substructure on the given elements, keeping domain order."""
        keep = set(elements)
        unknown = keep - set(self.domain)
        if unknown:
            raise InvalidStructureError(f"unknown elements {sorted(unknown)}")
        domain = tuple(x for x in self.domain if x in keep)
        rels = []
        for r in self.relations:
            tuples = [t for t in r.tuples if all(x in keep for x in t)]
            rels.append((r.name, r.arity, tuples))
        return RelationalStructure(domain, rels)

    # -- serialization -------------------------------------------------

    @classmethod
    def from_json(cls, obj):
        """Parse the on-disk structure format.

        Unlike the constructor, this rejects structures with no relations
        or with an empty relation, since files describe either templates
        or instances and an empty relation is almost certainly a mistake.
        """
        if not isinstance(obj, dict):
            raise InvalidStructureError("structure file must be a JSON object")
        try:
            domain = obj["domain"]
            relations = obj["relations"]
        except (KeyError, TypeError):
            raise InvalidStructureError(
                "structure file needs 'domain' and 'relations' keys") from None
        if not isinstance(relations, list) or not relations:
            raise EmptyRelationError("structure has no relations")
        rels = []
        for rd in relations:
            try:
                name, arity, tuples = rd["name"], rd["arity"], rd["tuples"]
            except (KeyError, TypeError):
                raise InvalidStructureError(
                    "each relation needs 'name', 'arity' and 'tuples'") from None
            if not tuples:
                raise EmptyRelationError(f"relation {name!r} has no tuples")
            rels.append((name, arity, [tuple(t) for t in tuples]))
        return cls(domain, rels)

    def to_json(self):
        return {
            "domain": list(self.domain),
            "relations": [
                {"name": r.name, "arity": r.arity,
                 "tuples": [list(t) for t in r.tuples]}
                for r in self.relations
            ],
        }


class Digraph:
    """A finite directed graph with named vertices.

    Vertex order is significant (deterministic iteration); edges are kept
    sorted by endpoint positions with duplicates removed.
    """

    def __init__(self, vertices, edges):
        vertices = tuple(str(v) for v in vertices)
        if len(set(vertices)) != len(vertices):
            raise InvalidStructureError("duplicate vertices")
        self.vertices = vertices
        self._index = {v: i for i, v in enumerate(vertices)}
        canon = set()
        for e in edges:
            u, v = e
            u, v = str(u), str(v)
            if u not in self._index or v not in self._index:
                raise InvalidStructureError(f"edge ({u!r}, {v!r}) uses unknown vertex")
            canon.add((u, v))
        self.edges = tuple(sorted(canon, key=lambda e: (self._index[e[0]], self._index[e[1]])))
        out = {v: [] for v in vertices}
        inc = {v: [] for v in vertices}
        for u, v in self.edges:
            out[u].append(v)
            inc[v].append(u)
        self._out = {v: tuple(ns) for v, ns in out.items()}
        self._in = {v: tuple(ns) for v, ns in inc.items()}

    def index(self, v):
        return self._index[v]

    def __contains__(self, v):
        return v in self._index

    def out_neighbors(self, v):
        return self._out[v]

    def in_neighbors(self, v):
        return self._in[v]

    def has_edge(self, u, v):
        return v in self._out[u]

    def num_vertices(self):
        return len(self.vertices)

    def num_edges(self):
        return len(self.edges)

    def __eq__(self, other):
        if not isinstance(other, Digraph):
            return NotImplemented
        return self.vertices == other.vertices and self.edges == other.edges

    def __repr__(self):
        return f"Digraph({len(self.vertices)} vertices, {len(self.edges)} edges)"

    def induced(self, vertices):
        keep = set(vertices)
        vs = tuple(v for v in self.vertices if v in keep)
        es = [e for e in self.edges if e[0] in keep and e[1] in keep]
        return Digraph(vs, es)

    def weak_components(self):
        """Connected components ignoring edge direction.

        Returns a list of vertex lists; components are ordered by their
        first vertex in vertex order, and so are the vertices inside.
        """
        seen = set()
        comps = []
        for start in self.vertices:
            if start in seen:
                continue
            comp = []
            stack = [start]
            seen.add(start)
            while stack:
                v = stack.pop()
                comp.append(v)
                for w in self._out[v] + self._in[v]:
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            comp.sort(key=self._index.__getitem__)
            comps.append(comp)
        return comps

    def as_structure(self, relation_name="E"):
        """View this digraph as a structure with one binary relation.

        The edge relation may be empty here; this is the internal bridge
        used to feed digraphs to the homomorphism solver.
        """
        return RelationalStructure(
            self.vertices, [(relation_name, 2, list(self.edges))])

    @classmethod
    def from_json(cls, obj):
        if not isinstance(obj, dict):
            raise InvalidStructureError("digraph file must be a JSON object")
        try:
            vertices = obj["vertices"]
            edges = obj["edges"]
        except (KeyError, TypeError):
            raise InvalidStructureError(
                "digraph file needs 'vertices' and 'edges' keys") from None
        return cls(vertices, [tuple(e) for e in edges])

    def to_json(self):
        return {"vertices": list(self.vertices),
                "edges": [list(e) for e in self.edges]}


@dataclass(frozen=True)
class LevelAssignment:
    """A level function on a digraph: every edge climbs by exactly one.

    Levels are normalized so each weak component has minimum level 0.
    ``height`` is the maximum level over the whole digraph.
    """

    levels: dict = field(compare=False)
    height: int

    def __getitem__(self, v):
        return self.levels[v]


def digraph_to_dot(g, levels=None, name="G"):
    """Render a digraph in dot format, one vertex/edge per line.

    With a level assignment, vertices of equal level are put on the same
    rank so the drawing is layered bottom-up.
    """
    lines = [f"digraph {name} {{", "  rankdir=BT;"]
    for v in g.vertices:
        lines.append(f'  "{v}";')
    if levels is not None:
        by_level = {}
        for v in g.vertices:
            by_level.setdefault(levels[v], []).append(v)
        for lvl in sorted(by_level):
            row = " ".join(f'"{v}";' for v in by_level[lvl])
            lines.append(f"  {{ rank=same; {row} }}")
    for u, v in g.edges:
        lines.append(f'  "{u}" -> "{v}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


FORWARD = 1
BACKWARD = -1


@dataclass(frozen=True)
class OrientedPathSpec:
    """An oriented path given by its sequence of edge directions.

    Entry +1 means the i-th edge points from position i to i+1, entry -1
    the reverse.  Positions run 0..len(word); levels are the running sum
    of the word, shifted so the minimum is 0.
    """

    word: tuple[int, ...]

    def __post_init__(self):
        if any(d not in (FORWARD, BACKWARD) for d in self.word):
            raise InvalidStructureError("path word entries must be +1 or -1")

    @classmethod
    def single_edge(cls):
        return cls((FORWARD,))

    @classmethod
    def zigzag(cls):
        return cls((FORWARD, BACKWARD, FORWARD))

    def __add__(self, other):
        """Concatenation: the terminal vertex is identified with the
        other path's initial vertex."""
        return OrientedPathSpec(self.word + other.word)

    def __len__(self):
        return len(self.word)

    @property
    def last_position(self):
        return len(self.word)

    def levels(self):
        lvls = [0]
        for d in self.word:
            lvls.append(lvls[-1] + d)
        low = min(lvls)
        return tuple(x - low for x in lvls)

    @property
    def height(self):
        lvls = self.levels()
        return max(lvls)

    def realize(self, names=None, prefix="p"):
        """Build the path as a digraph with vertices prefix0..prefixL."""
        n = len(self.word) + 1
        if names is None:
            names = [f"{prefix}{i}" for i in range(n)]
        else:
            names = list(names)
            if len(names) != n:
                raise InvalidStructureError(
                    f"expected {n} vertex names, got {len(names)}")
        edges = []
        for i, d in enumerate(self.word):
            if d == FORWARD:
                edges.append((names[i], names[i + 1]))
            else:
                edges.append((names[i + 1], names[i]))
        return Digraph(names, edges)


@dataclass(frozen=True)
class CollapsedTemplate:
    """A multi-relation template rewritten over a single relation.

    The single relation is the product of the original relations in
    declaration order; ``offsets[i]`` is the first coordinate of relation
    i inside the combined tuples.
    """

    structure: RelationalStructure
    offsets: tuple[int, ...]
    source: RelationalStructure

    @property
    def relation(self):
        return self.structure.relations[0]

    @property
    def arity(self):
        return self.relation.arity


def collapse_to_single_relation(structure, relation_name="R"):
    """Combine all relations of a template into one product relation.

    Solvability of instances is preserved both ways: a combined
    constraint on a block of variables says each original relation holds
    on its slice.  A template that is already single-relation is passed
    through unchanged.
    """
    if not structure.relations:
        raise EmptyRelationError("template has no relations")
    for r in structure.relations:
        if not r.tuples:
            raise EmptyRelationError(f"relation {r.name!r} has no tuples")
    offsets = []
    at = 0
    for r in structure.relations:
        offsets.append(at)
        at += r.arity
    if structure.is_single_relation:
        return CollapsedTemplate(structure, tuple(offsets), structure)
    combined = []
    for combo in itertools.product(*(r.tuples for r in structure.relations)):
        flat = tuple(itertools.chain.from_iterable(combo))
        combined.append(flat)
    out = RelationalStructure(structure.domain, [(relation_name, at, combined)])
    return CollapsedTemplate(out, tuple(offsets), structure)


def tuple_name(names):
    """Render a tuple of element names as a single element name."""
    return "(" + ",".join(names) + ")"


def product_structure(structure, power, max_elements=200000):
    """The direct power of a structure.

    Elements are tuples of the original elements (rendered with
    :func:`tuple_name`); a relation holds on a tuple of product elements
    iff it holds coordinatewise.
    """
    n = len(structure.domain) ** power
    if n > max_elements:
        raise SizeGuardError(
            f"product would have {n} elements (bound {max_elements})")
    elems = [tuple_name(c) for c in itertools.product(structure.domain, repeat=power)]
    rels = []
    for r in structure.relations:
        tuples = []
        for combo in itertools.product(r.tuples, repeat=power):
            # combo[i] is the i-th coordinate's tuple; transpose it
            tuples.append(tuple(tuple_name([combo[i][j] for i in range(power)])
                                for j in range(r.arity)))
        rels.append((r.name, r.arity, tuples))
    return RelationalStructure(elems, rels)


def product_digraph(g, power, max_vertices=200000):
    """The direct power of a digraph (edges hold coordinatewise)."""
    n = len(g.vertices) ** power
    if n > max_vertices:
        raise SizeGuardError(
            f"product would have {n} vertices (bound {max_vertices})")
    verts = [tuple_name(c) for c in itertools.product(g.vertices, repeat=power)]
    edges = []
    for combo in itertools.product(g.edges, repeat=power):
        edges.append((tuple_name([e[0] for e in combo]),
                      tuple_name([e[1] for e in combo])))
    return Digraph(verts, edges)
