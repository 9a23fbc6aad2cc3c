"""Operation tables, linear identities, and polymorphism search.

A polymorphism of a structure is an operation on its domain that maps
related tuples coordinatewise to related tuples.  Searching for
polymorphisms satisfying a system of linear identities is itself a
homomorphism problem: build one indicator variable per symbol/argument
combination, merge variables forced equal by the identities, pin the
ones forced to constants, and hand the rest to the solver.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass

from .reductions import UnionFind
from .solver import DEFAULT_BUDGET, HomInstance
from .structures import RelationalStructure, SizeGuardError, tuple_name
from .templates import zigzag_digraph_template


class IdentityParseError(ValueError):
    """Raised on malformed identity files."""


# ---------------------------------------------------------------------
# operation tables


class OperationTable:
    """A finite operation given by its full table."""

    def __init__(self, domain, arity, mapping):
        self.domain = tuple(domain)
        self.arity = int(arity)
        dom = set(self.domain)
        table = {}
        for args, value in mapping.items():
            args = tuple(args)
            if len(args) != self.arity or not set(args) <= dom or value not in dom:
                raise ValueError(f"bad table row {args} -> {value}")
            table[args] = value
        if len(table) != len(self.domain) ** self.arity:
            raise ValueError(
                f"table has {len(table)} rows, expected a complete table "
                f"over {len(self.domain)} elements")
        self._table = table

    def __call__(self, *args):
        return self._table[args]

    @classmethod
    def from_function(cls, domain, arity, fn):
        mapping = {args: fn(*args)
                   for args in itertools.product(domain, repeat=arity)}
        return cls(domain, arity, mapping)

    def rows(self):
        for args in itertools.product(self.domain, repeat=self.arity):
            yield args, self._table[args]

    def to_json(self):
        return {"arity": self.arity,
                "map": [list(args) + [value] for args, value in self.rows()]}

    @classmethod
    def from_json(cls, obj, domain=None):
        try:
            arity = int(obj["arity"])
            rows = obj["map"]
        except (KeyError, TypeError, ValueError):
            raise ValueError(
                "table file needs 'arity' and 'map' keys") from None
        mapping = {}
        seen = set()
        for row in rows:
            if len(row) != arity + 1:
                raise ValueError(f"table row {row} does not match arity {arity}")
            args, value = tuple(row[:-1]), row[-1]
            mapping[args] = value
            seen.update(row)
        if domain is None:
            domain = sorted(seen)
        return cls(domain, arity, mapping)

    def is_idempotent(self):
        return all(self(*((x,) * self.arity)) == x for x in self.domain)

    def polymorphism_failure(self, structure):
        """First relation tuple combination this operation breaks, or None."""
        for r in structure.relations:
            for combo in itertools.product(r.tuples, repeat=self.arity):
                image = tuple(self(*(combo[i][j] for i in range(self.arity)))
                              for j in range(r.arity))
                if image not in r.tuples:
                    return (r.name, combo, image)
        return None

    def is_polymorphism(self, structure):
        return self.polymorphism_failure(structure) is None


# ---------------------------------------------------------------------
# linear identities


@dataclass(frozen=True)
class Term:
    """Either a bare variable (symbol None) or one symbol applied to
    variables; nesting is not supported."""

    symbol: str
    args: tuple

    def variables(self):
        return set(self.args)

    def evaluate(self, interps, assignment):
        if self.symbol is None:
            return assignment[self.args[0]]
        return interps[self.symbol](*(assignment[v] for v in self.args))

    def __str__(self):
        if self.symbol is None:
            return self.args[0]
        return f"{self.symbol}({','.join(self.args)})"


@dataclass(frozen=True)
class Identity:
    lhs: Term
    rhs: Term

    def variables(self):
        return self.lhs.variables() | self.rhs.variables()

    def is_balanced(self):
        return self.lhs.variables() == self.rhs.variables()

    def __str__(self):
        return f"{self.lhs} = {self.rhs}"


_APP_RE = re.compile(r"^(\w+)\s*\(\s*([\w\s,]*?)\s*\)$")
_VAR_RE = re.compile(r"^\w+$")


class IdentitySystem:
    """A finite set of operation symbols, linear identities over them,
    and symbols marked idempotent."""

    def __init__(self, symbols, identities, idempotent=()):
        self.symbols = dict(symbols)
        self.identities = tuple(identities)
        self.idempotent = frozenset(idempotent)
        for s in self.idempotent:
            if s not in self.symbols:
                raise IdentityParseError(f"idempotent marker for unknown symbol {s!r}")
        for ident in self.identities:
            for t in (ident.lhs, ident.rhs):
                if t.symbol is not None:
                    if t.symbol not in self.symbols:
                        raise IdentityParseError(f"unknown symbol {t.symbol!r}")
                    if len(t.args) != self.symbols[t.symbol]:
                        raise IdentityParseError(
                            f"symbol {t.symbol!r} used with {len(t.args)} "
                            f"arguments, declared {self.symbols[t.symbol]}")

    @classmethod
    def parse(cls, text):
        """Parse the identity file format: one ``lhs = rhs`` per line,
        ``idempotent f`` markers, ``#`` comments."""
        symbols = {}
        identities = []
        idempotent = []

        def parse_term(s):
            s = s.strip()
            m = _APP_RE.match(s)
            if m:
                sym = m.group(1)
                args = tuple(a.strip() for a in m.group(2).split(","))
                if not all(_VAR_RE.match(a) for a in args):
                    raise IdentityParseError(f"bad argument list in {s!r}")
                if sym in symbols and symbols[sym] != len(args):
                    raise IdentityParseError(
                        f"symbol {sym!r} used with inconsistent arity")
                symbols.setdefault(sym, len(args))
                return Term(sym, args)
            if _VAR_RE.match(s):
                return Term(None, (s,))
            raise IdentityParseError(f"cannot parse term {s!r}")

        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("idempotent"):
                parts = line.split()
                if len(parts) != 2:
                    raise IdentityParseError(
                        f"line {lineno}: expected 'idempotent <symbol>'")
                idempotent.append(parts[1])
                continue
            if "=" not in line:
                raise IdentityParseError(f"line {lineno}: no '=' in {line!r}")
            lhs, rhs = line.split("=", 1)
            identities.append(Identity(parse_term(lhs), parse_term(rhs)))

        for s in idempotent:
            if s not in symbols:
                symbols[s] = None
        bad = [s for s, a in symbols.items() if a is None]
        if bad:
            raise IdentityParseError(
                f"symbols {bad} marked idempotent but never applied; "
                "arity cannot be inferred")
        return cls(symbols, identities, idempotent)

    def __str__(self):
        lines = [f"idempotent {s}" for s in sorted(self.idempotent)]
        lines.extend(str(i) for i in self.identities)
        return "\n".join(lines)


def check_identities(interps, system, domain=None):
    """Check a family of operations against an identity system.

    ``interps`` maps symbol names to callables with an ``arity``
    attribute (tables or lifted operations).  Returns ``(True, None)``
    or ``(False, (description, assignment))`` with the first violation.
    """
    for s, ar in system.symbols.items():
        if s not in interps:
            return False, (f"missing interpretation for {s}", {})
        if interps[s].arity != ar:
            return False, (f"symbol {s} has arity {ar}, interpretation has "
                           f"{interps[s].arity}", {})
    if domain is None:
        domain = next(iter(interps.values())).domain
    for s in sorted(system.idempotent):
        f = interps[s]
        for x in domain:
            if f(*((x,) * f.arity)) != x:
                return False, (f"idempotent {s}", {"x": x})
    for ident in system.identities:
        vs = sorted(ident.variables())
        for values in itertools.product(domain, repeat=len(vs)):
            assignment = dict(zip(vs, values))
            if ident.lhs.evaluate(interps, assignment) != \
                    ident.rhs.evaluate(interps, assignment):
                return False, (str(ident), assignment)
    return True, None


# ---------------------------------------------------------------------
# canned identity systems


def wnu_system(m, symbol="w"):
    """Weak near-unanimity: idempotent, and all one-off applications
    agree.  Needs arity at least 3."""
    if m < 3:
        raise ValueError(f"weak near-unanimity needs arity >= 3, got {m}")
    terms = []
    for pos in range(m):
        args = tuple("y" if j == pos else "x" for j in range(m))
        terms.append(Term(symbol, args))
    idents = [Identity(terms[i], terms[i + 1]) for i in range(m - 1)]
    return IdentitySystem({symbol: m}, idents, [symbol])


def majority_system(symbol="maj"):
    x, y = "x", "y"
    t = lambda *args: Term(symbol, args)
    v = lambda n: Term(None, (n,))
    idents = [
        Identity(t(y, x, x), v(x)),
        Identity(t(x, y, x), v(x)),
        Identity(t(x, x, y), v(x)),
    ]
    return IdentitySystem({symbol: 3}, idents, [symbol])


def maltsev_system(symbol="p"):
    t = lambda *args: Term(symbol, args)
    v = lambda n: Term(None, (n,))
    idents = [
        Identity(t("y", "x", "x"), v("y")),
        Identity(t("x", "x", "y"), v("y")),
    ]
    return IdentitySystem({symbol: 3}, idents, [symbol])


def three_permutability_system(sym1="p1", sym2="p2"):
    t1 = lambda *args: Term(sym1, args)
    t2 = lambda *args: Term(sym2, args)
    v = lambda n: Term(None, (n,))
    idents = [
        Identity(t1("x", "y", "y"), v("x")),
        Identity(t2("x", "x", "y"), v("y")),
        Identity(t1("x", "x", "y"), t2("x", "y", "y")),
    ]
    return IdentitySystem({sym1: 3, sym2: 3}, idents, [sym1, sym2])


def commutative_idempotent_binary_system(symbol="f"):
    """A binary symmetric idempotent operation."""
    t = lambda *args: Term(symbol, args)
    idents = [Identity(t("x", "y"), t("y", "x"))]
    return IdentitySystem({symbol: 2}, idents, [symbol])


def edge_system(k, symbol="e"):
    """The k-edge operation identities ((k+1)-ary), as standard in the
    literature on few subpowers."""
    if k < 2:
        raise ValueError(f"edge operations need k >= 2, got {k}")
    m = k + 1
    t = lambda args: Term(symbol, tuple(args))
    v = lambda n: Term(None, (n,))
    rows = []
    rows.append(["y", "y"] + ["x"] * (m - 2))
    rows.append(["y", "x", "y"] + ["x"] * (m - 3))
    for j in range(3, m):
        row = ["x"] * m
        row[j] = "y"
        rows.append(row)
    idents = [Identity(t(r), v("x")) for r in rows]
    return IdentitySystem({symbol: m}, idents)


# ---------------------------------------------------------------------
# indicator search


def _indicator_var(symbol, args):
    return f"{symbol}{tuple_name(args)}"


def find_interpretations(structure, system, budget=DEFAULT_BUDGET,
                         max_variables=200000):
    """Search for polymorphisms of a structure satisfying an identity
    system; returns symbol -> table, or None.

    One variable per symbol and argument tuple; identities contribute
    variable merges and constant pins, the polymorphism condition
    contributes the constraints.  The search is joint over all symbols.
    """
    domain = structure.domain
    total = sum(len(domain) ** ar for ar in system.symbols.values())
    if total > max_variables:
        raise SizeGuardError(
            f"indicator construction needs {total} variables "
            f"(bound {max_variables})")

    variables = []
    for s, ar in system.symbols.items():
        for args in itertools.product(domain, repeat=ar):
            variables.append(_indicator_var(s, args))

    rels = []
    for r in structure.relations:
        scopes = []
        for s, ar in system.symbols.items():
            for combo in itertools.product(r.tuples, repeat=ar):
                scopes.append(tuple(
                    _indicator_var(s, tuple(combo[i][j] for i in range(ar)))
                    for j in range(r.arity)))
        rels.append((r.name, r.arity, scopes))

    uf = UnionFind()
    pins = {}

    def pin(node, value):
        root = uf.find(node)
        if root in pins and pins[root] != value:
            return False
        pins[root] = value
        return True

    ok = True
    for s in system.idempotent:
        for a in domain:
            node = _indicator_var(s, (a,) * system.symbols[s])
            ok = ok and pin(node, a)
    for ident in system.identities:
        vs = sorted(ident.variables())
        for values in itertools.product(domain, repeat=len(vs)):
            assignment = dict(zip(vs, values))
            l, r = ident.lhs, ident.rhs
            if l.symbol is None and r.symbol is None:
                if assignment[l.args[0]] != assignment[r.args[0]]:
                    return None
                continue
            if l.symbol is None:
                l, r = r, l
            lnode = _indicator_var(l.symbol,
                                   tuple(assignment[v] for v in l.args))
            if r.symbol is None:
                ok = ok and pin(lnode, assignment[r.args[0]])
            else:
                rnode = _indicator_var(r.symbol,
                                       tuple(assignment[v] for v in r.args))
                ra, rb = uf.find(lnode), uf.find(rnode)
                if ra != rb:
                    root = uf.union(lnode, rnode)
                    for old in (ra, rb):
                        if old in pins and old != root:
                            value = pins.pop(old)
                            ok = ok and pin(root, value)
    if not ok:
        return None

    rep = {v: uf.find(v) for v in variables}
    quot_vars = list(dict.fromkeys(rep[v] for v in variables))
    quot_rels = [(name, ar, [tuple(rep[x] for x in scope) for scope in scopes])
                 for name, ar, scopes in rels]
    source = RelationalStructure(quot_vars, quot_rels)
    quot_pins = {root: val for root, val in pins.items()}

    sol = HomInstance(source, structure, pins=quot_pins).solve(budget)
    if sol is None:
        return None

    out = {}
    for s, ar in system.symbols.items():
        mapping = {args: sol[rep[_indicator_var(s, args)]]
                   for args in itertools.product(domain, repeat=ar)}
        out[s] = OperationTable(domain, ar, mapping)

    good, why = check_identities(out, system, domain)
    if not good:
        raise AssertionError(f"search produced a bad interpretation: {why}")
    for s, table in out.items():
        bad = table.polymorphism_failure(structure)
        if bad is not None:
            raise AssertionError(f"search produced a non-polymorphism: {bad}")
    return out


def find_polymorphism(structure, arity, symbol="f", budget=DEFAULT_BUDGET):
    """Any polymorphism of the given arity, or None."""
    system = IdentitySystem({symbol: arity}, [])
    out = find_interpretations(structure, system, budget=budget)
    return out[symbol] if out else None


def find_wnu(structure, arity, budget=DEFAULT_BUDGET):
    """A weak near-unanimity polymorphism of the given arity, or None."""
    out = find_interpretations(structure, wnu_system(arity), budget=budget)
    return out["w"] if out else None


def wnu_report(structure, max_arity, budget=DEFAULT_BUDGET):
    """Which arities in 3..max_arity admit a weak near-unanimity
    polymorphism.  This is a bounded-arity probe, not a decision
    procedure: a row of ``False`` only says no such operation exists up
    to the stated arity."""
    return {m: find_wnu(structure, m, budget=budget) is not None
            for m in range(3, max_arity + 1)}


# ---------------------------------------------------------------------
# zigzag operations


_ZPOS = {"00": 0, "01": 1, "10": 2, "11": 3}
_ZVERT = {v: k for k, v in _ZPOS.items()}


def zigzag_meet(x, y):
    """The vertex closer to the start of the zigzag."""
    return _ZVERT[min(_ZPOS[x], _ZPOS[y])]


def zigzag_join(x, y):
    return _ZVERT[max(_ZPOS[x], _ZPOS[y])]


def zigzag_median(x, y, z):
    return zigzag_join(zigzag_join(zigzag_meet(x, y), zigzag_meet(x, z)),
                       zigzag_meet(y, z))


def zigzag_p1(x, y, z):
    if "01" in (x, y, z) and y != z:
        return "01"
    if "10" in (x, y, z) and "01" not in (x, y, z) and y != z:
        return "10"
    return x


def zigzag_p2(x, y, z):
    if "01" in (x, y, z) and x != y:
        return "01"
    if "10" in (x, y, z) and "01" not in (x, y, z) and x != y:
        return "10"
    if x == y:
        return z
    return x


def zigzag_operations():
    """Tables of the built-in zigzag operations, keyed by name."""
    dom = zigzag_digraph_template().domain
    return {
        "meet": OperationTable.from_function(dom, 2, zigzag_meet),
        "join": OperationTable.from_function(dom, 2, zigzag_join),
        "median": OperationTable.from_function(dom, 3, zigzag_median),
        "p1": OperationTable.from_function(dom, 3, zigzag_p1),
        "p2": OperationTable.from_function(dom, 3, zigzag_p2),
    }


# ---------------------------------------------------------------------
# endomorphisms and cores


def endomorphisms(structure, budget=DEFAULT_BUDGET, domains=None, limit=None):
    """All homomorphisms of a structure to itself, in canonical order."""
    inst = HomInstance(structure, structure, domains=domains)
    return inst.solve_all(budget=budget, limit=limit)


def is_core(structure, budget=DEFAULT_BUDGET, domains=None):
    """Whether every endomorphism is surjective."""
    n = len(structure.domain)
    for e in endomorphisms(structure, budget=budget, domains=domains):
        if len(set(e.values())) != n:
            return False
    return True


@dataclass(frozen=True)
class CoreResult:
    core: RelationalStructure
    retraction: dict


def core_of(structure, budget=DEFAULT_BUDGET):
    """A core of the structure and a retraction onto it.

    Picks an endomorphism with the smallest image; the structure induced
    on that image is a core, and iterating the endomorphism yields a
    retraction (identity on the image).
    """
    endos = endomorphisms(structure, budget=budget)
    best = None
    for e in endos:
        size = len(set(e.values()))
        if best is None or size < len(set(best.values())):
            best = e
    image = sorted(set(best.values()), key=structure.index)
    r = dict(best)
    while any(r[c] != c for c in image):
        r = {x: best[r[x]] for x in structure.domain}
    core = structure.induced(image)
    return CoreResult(core, r)
