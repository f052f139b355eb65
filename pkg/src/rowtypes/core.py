"""Type algebra: kinds, variables, hash-consed nodes and disjunctive normal forms.

Three sorts of terms share one store: types (kind ``TYPE``), field-types
(kind ``FIELD``, types possibly united with ``undef``) and rows (kind
``Row(excluded)``, partial records defined on every label but the excluded
ones).  Recursive types are built with placeholders that are bound later.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional, Union

BASICS = ("int", "str", "true", "false")

CLOSED = "closed"
OPEN = "open"


class KindError(Exception):
    pass


class ContractivityError(Exception):
    pass


class ProjectionError(Exception):
    """A field projection or cut was requested on a row that is not atom-shaped."""


@dataclass(frozen=True)
class Kind:
    tag: str
    excluded: frozenset = frozenset()

    def __str__(self):
        if self.tag == "row":
            return "Row{" + ",".join(sorted(self.excluded)) + "}"
        return self.tag.capitalize()


TYPE = Kind("type")
FIELD = Kind("field")


def row_kind(excluded: Iterable[str]) -> Kind:
    return Kind("row", frozenset(excluded))


class Var:
    """A type, field or row variable.

    Derived variables come from decomposing a row variable: ``label`` is set
    for a field projection and ``cut`` for a row restriction.
    """

    __slots__ = ("name", "kind", "index", "base", "label", "cut")

    def __init__(self, name, kind, index, base=None, label=None, cut=None):
        self.name = name
        self.kind = kind
        self.index = index
        self.base = base
        self.label = label
        self.cut = cut

    @property
    def is_row(self):
        return self.kind.tag == "row"

    @property
    def root(self) -> "Var":
        return self.base if self.base is not None else self

    @property
    def derived(self):
        return self.base is not None

    def __repr__(self):
        sigil = {"type": "'", "field": "?", "row": "@"}[self.kind.tag]
        if self.label is not None:
            return f"@{self.base.name}.{self.label}"
        if self.cut is not None:
            return f"@{self.base.name}\\{{{','.join(sorted(self.cut))}}}"
        return sigil + self.name


Tail = Union[str, Var]


class Node:
    """An interned term.  Identity is structural equality."""

    __slots__ = ("id", "tag", "args", "kind", "store", "target", "__weakref__")

    def __init__(self, id, tag, args, kind, store):
        self.id = id
        self.tag = tag
        self.args = args
        self.kind = kind
        self.store = store
        self.target = None

    def __repr__(self):
        from .frontend import show
        return show(self)

    # record/row atom accessors
    @property
    def fields(self) -> tuple:
        return self.args[0]

    @property
    def tail(self) -> Tail:
        return self.args[1]

    @property
    def labels(self) -> frozenset:
        return frozenset(l for l, _ in self.args[0])

    def field_map(self) -> dict:
        return dict(self.args[0])


def deref(n: Node) -> Node:
    while n.tag == "ph":
        if n.target is None:
            return n
        n = n.target
    return n


@dataclass(frozen=True)
class TypeSummand:
    P: frozenset
    N: frozenset
    Vp: frozenset = frozenset()
    Vn: frozenset = frozenset()

    @property
    def world(self) -> Optional[str]:
        for a in self.P:
            return world_of(a)
        return None


@dataclass(frozen=True)
class FieldSummand:
    P: frozenset
    N: frozenset
    Vp: frozenset = frozenset()
    Vn: frozenset = frozenset()
    undef: Optional[bool] = None


@dataclass(frozen=True)
class RowSummand:
    P: frozenset
    N: frozenset


@dataclass
class Dnf:
    summands: list
    kind: Kind

    def by_world(self) -> dict:
        out = {"basic": [], "arrow": [], "record": [], None: []}
        for s in self.summands:
            out[s.world].append(s)
        return out


WORLDS = ("basic", "arrow", "record")


def world_of(atom: Node) -> str:
    return {"basic": "basic", "arrow": "arrow", "rec": "record"}[atom.tag]


def _join_kind(a: Kind, b: Kind) -> Kind:
    if a == b:
        return a
    if {a.tag, b.tag} == {"type", "field"}:
        return FIELD
    raise KindError(f"cannot combine terms of kinds {a} and {b}")


class Store:
    """Hash-consing table plus the variable table and per-store caches."""

    def __init__(self):
        self._table: dict = {}
        self._nodes: list = []
        self._vars: dict = {}
        self._var_count = itertools.count()
        self._fresh = itertools.count(1)
        self.dnf_cache: dict = {}
        # emptiness memo (see subtype)
        self.decided: dict = {}
        self.assumed: dict = {}
        self.low = 0
        self.bot_type = self._mk("bot", (), TYPE)
        self.bot_field = self._mk("bot", (), FIELD)
        self.undef = self._mk("undef", (), FIELD)
        self.any = self._mk("not", (self.bot_type,), TYPE)
        self.field_top = self._mk("or", tuple(sorted((self.any, self.undef), key=_nid)), FIELD)

    # -- interning ---------------------------------------------------------
    def _mk(self, tag, args, kind):
        key = (tag, _key(args), kind)
        n = self._table.get(key)
        if n is None:
            n = Node(len(self._nodes), tag, args, kind, self)
            self._nodes.append(n)
            self._table[key] = n
        return n

    def intern(self, tag, *args, kind=None) -> Node:
        """Generic entry point; dispatches to the checked constructors."""
        ctor = {
            "basic": self.basic, "arrow": self.arrow, "or": self.or_, "and": self.and_,
            "not": self.neg, "undef": lambda: self.undef,
        }.get(tag)
        if tag == "bot":
            return self.bot(kind or TYPE)
        if tag == "var":
            return self.var(args[0])
        if tag == "rec":
            return self.record(*args)
        if tag == "row":
            return self.row(*args)
        if ctor is None:
            raise ValueError(f"unknown node tag {tag}")
        return ctor(*args)

    # -- variables ---------------------------------------------------------
    def _var(self, name, kind, **kw) -> Var:
        key = (name, kind.tag)
        v = self._vars.get(key)
        if v is None:
            v = Var(name, kind, next(self._var_count), **kw)
            self._vars[key] = v
        elif v.kind != kind:
            raise KindError(f"variable {v!r} used with kind {kind} but declared {v.kind}")
        return v

    def tvar(self, name) -> Var:
        return self._var(name, TYPE)

    def fvar(self, name) -> Var:
        return self._var(name, FIELD)

    def rvar(self, name, excluded=()) -> Var:
        return self._var(name, row_kind(excluded))

    def lookup_var(self, name, tag) -> Optional[Var]:
        return self._vars.get((name, tag))

    def fresh(self, kind: Kind, hint="v") -> Var:
        hint = hint.split(".")[0].split("\\")[0].rstrip("0123456789_") or "v"
        while True:
            name = f"{hint}_{next(self._fresh)}"
            if (name, kind.tag) not in self._vars:
                return self._var(name, kind)

    def proj_var(self, rho: Var, label: str) -> Var:
        """The field variable standing for field ``label`` of row variable ``rho``."""
        base = rho.root
        if label in base.kind.excluded or (rho.cut and label in rho.cut):
            raise KindError(f"label {label} outside the definition space of {rho!r}")
        return self._var(f"{base.name}.{label}", FIELD, base=base, label=label)

    def cut_var(self, rho: Var, labels: Iterable[str]) -> Var:
        """The row variable for ``rho`` restricted away from ``labels``."""
        base = rho.root
        cut = frozenset(labels) | (rho.cut or frozenset())
        cut = cut - base.kind.excluded
        if not cut:
            return base
        name = f"{base.name}\\" + ",".join(sorted(cut))
        return self._var(name, row_kind(base.kind.excluded | cut), base=base, cut=cut)

    # -- constructors ------------------------------------------------------
    def var(self, v: Var) -> Node:
        if v.is_row:
            return self.row((), v, v.kind.excluded)
        return self._mk("var", (v,), v.kind)

    def basic(self, name) -> Node:
        if name == "bool":
            return self.or_(self.basic("true"), self.basic("false"))
        if name not in BASICS:
            raise KindError(f"unknown basic type {name}")
        return self._mk("basic", (name,), TYPE)

    def arrow(self, dom: Node, cod: Node) -> Node:
        _expect(dom, TYPE)
        _expect(cod, TYPE)
        return self._mk("arrow", (dom, cod), TYPE)

    def bot(self, kind: Kind) -> Node:
        if kind == TYPE:
            return self.bot_type
        if kind == FIELD:
            return self.bot_field
        return self._mk("bot", (), kind)

    def top(self, kind: Kind) -> Node:
        if kind == TYPE:
            return self.any
        if kind == FIELD:
            return self.field_top
        return self.row((), OPEN, kind.excluded)

    def _fields(self, fields) -> tuple:
        items = fields.items() if isinstance(fields, dict) else fields
        out = []
        for l, f in items:
            if f.kind.tag not in ("type", "field"):
                raise KindError(f"field {l} has kind {f.kind}")
            out.append((l, f))
        out.sort(key=lambda p: p[0])
        if len({l for l, _ in out}) != len(out):
            raise KindError("duplicate label in record")
        return tuple(out)

    def _check_tail(self, tail, covered: frozenset):
        if isinstance(tail, Var):
            if not tail.is_row:
                raise KindError(f"tail {tail!r} is not a row variable")
            if tail.kind.excluded != covered:
                raise KindError(
                    f"row variable {tail!r} has definition space excluding "
                    f"{{{','.join(sorted(tail.kind.excluded))}}} but is used where "
                    f"{{{','.join(sorted(covered))}}} are excluded")
        elif tail not in (OPEN, CLOSED):
            raise KindError(f"bad tail {tail!r}")

    def record(self, fields, tail: Tail = CLOSED) -> Node:
        fs = self._fields(fields)
        self._check_tail(tail, frozenset(l for l, _ in fs))
        return self._mk("rec", (fs, tail), TYPE)

    def row(self, fields, tail: Tail, excluded: Iterable[str] = ()) -> Node:
        fs = self._fields(fields)
        excl = frozenset(excluded)
        labels = frozenset(l for l, _ in fs)
        if labels & excl:
            raise KindError(
                f"row fields {{{','.join(sorted(labels & excl))}}} are also excluded")
        self._check_tail(tail, labels | excl)
        return self._mk("row", (fs, tail, excl), row_kind(excl))

    def or_(self, a: Node, b: Node) -> Node:
        k = _join_kind(a.kind, b.kind)
        if a is b:
            return a
        if a.tag == "bot":
            return b
        if b.tag == "bot":
            return a
        if a is self.top(k) or b is self.top(k):
            return self.top(k)
        a, b = sorted((a, b), key=_nid)
        return self._mk("or", (a, b), k)

    def and_(self, a: Node, b: Node) -> Node:
        k = _join_kind(a.kind, b.kind)
        if a is b:
            return a
        if a.tag == "bot" or b.tag == "bot":
            return self.bot(k)
        if a is self.top(k) or (k == FIELD and a is self.any and b.kind == TYPE):
            return b
        if b is self.top(k) or (k == FIELD and b is self.any and a.kind == TYPE):
            return a
        a, b = sorted((a, b), key=_nid)
        return self._mk("and", (a, b), k)

    def neg(self, a: Node, kind: Optional[Kind] = None) -> Node:
        """Complement of ``a`` within ``kind`` (field complement includes undef)."""
        k = kind or a.kind
        if a.kind != k and not (a.kind == TYPE and k == FIELD):
            raise KindError(f"cannot complement a {a.kind} term within {k}")
        if a.tag == "not" and a.kind == k:
            return a.args[0]
        if a is self.top(k):
            return self.bot(k)
        if a.tag == "bot" and a.kind == k:
            return self.top(k)
        if k == FIELD and a is self.undef:
            return self.any
        return self._mk("not", (a,), k)

    def diff(self, a: Node, b: Node) -> Node:
        k = _join_kind(a.kind, b.kind)
        return self.and_(a, self.neg(b, k))

    def union(self, items: Iterable[Node], kind: Kind) -> Node:
        out = self.bot(kind)
        for n in items:
            out = self.or_(out, n)
        return out

    def inter(self, items: Iterable[Node], kind: Kind) -> Node:
        out = self.top(kind)
        for n in items:
            out = self.and_(out, n)
        return out

    def lift(self, r: Node, labels: Iterable[str], target: Optional[frozenset]) -> Node:
        """Extend row ``r`` with the labels it excludes, each bound to the field top.

        ``target`` is None for a record type, else the excluded set of the
        resulting row.
        """
        L = frozenset(labels)
        want = L | (target or frozenset())
        if r.kind != row_kind(want):
            raise KindError(f"cannot lift a {r.kind} over {sorted(L)}")
        r = deref(r) if r.tag == "ph" and r.target is not None else r
        if r.tag == "row":
            return self._lift_atom(r, L, target)
        if r.tag == "bot":
            return self.bot(TYPE if target is None else row_kind(target))
        if r.tag == "or":
            return self.or_(self.lift(r.args[0], L, target), self.lift(r.args[1], L, target))
        if not L and target is not None:
            return r
        k = TYPE if target is None else row_kind(target)
        return self._mk("lift", (r, L, target), k)

    def _lift_atom(self, a: Node, L: frozenset, target) -> Node:
        fs = dict(a.fields)
        for l in L:
            fs[l] = self.field_top
        if target is None:
            return self.record(fs, a.tail)
        return self.row(fs, a.tail, target)

    def rowx(self, fields, inner: Node, excluded: Iterable[str]) -> Node:
        """The row with explicit ``fields`` whose remaining labels come from row ``inner``."""
        fs = self._fields(fields)
        excl = frozenset(excluded)
        labels = frozenset(l for l, _ in fs)
        if inner.kind != row_kind(excl | labels):
            raise KindError(f"row tail of kind {inner.kind} does not fit fields {sorted(labels)}")
        if not fs:
            return inner
        i = deref(inner)
        if i.tag == "row":
            return self.row(fs + i.fields, i.tail, excl)
        if i.tag == "bot":
            return self.bot(row_kind(excl))
        return self._mk("rowx", (fs, inner, excl), row_kind(excl))

    def record_with_row(self, fields, inner: Node) -> Node:
        """A record type whose unlisted labels are described by row ``inner``."""
        fs = self._fields(fields)
        labels = frozenset(l for l, _ in fs)
        i = deref(inner)
        if i.tag == "row":
            return self.record(fs + i.fields, i.tail)
        return self.and_(self.record(fs, OPEN), self.lift(inner, labels, None))

    # -- recursion ---------------------------------------------------------
    def placeholder(self, kind: Kind = TYPE) -> Node:
        n = Node(len(self._nodes), "ph", (len(self._nodes),), kind, self)
        self._nodes.append(n)
        return n

    def bind(self, ph: Node, body: Node) -> Node:
        if ph.tag != "ph" or ph.target is not None:
            raise ValueError("can only bind a fresh placeholder")
        if body.kind != ph.kind and not (ph.kind == FIELD and body.kind == TYPE):
            raise KindError(f"placeholder of kind {ph.kind} bound to {body.kind}")
        ph.target = body
        if not _contractive(ph):
            ph.target = None
            raise ContractivityError("recursive occurrence not guarded by a constructor")
        return ph

    def mk_rec_type(self, builder, kind: Kind = TYPE) -> Node:
        ph = self.placeholder(kind)
        body = builder(ph)
        if body is ph:
            raise ContractivityError("recursive occurrence not guarded by a constructor")
        return self.bind(ph, body)


def _nid(n: Node) -> int:
    return n.id


def _key(args):
    out = []
    for a in args:
        if isinstance(a, Node):
            out.append(("n", a.id))
        elif isinstance(a, tuple):
            out.append(("t", _key(a)))
        elif isinstance(a, Var):
            out.append(("v", id(a)))
        elif isinstance(a, frozenset):
            out.append(("s", tuple(sorted(a))))
        else:
            out.append(a)
    return tuple(out)


def _expect(n: Node, kind: Kind):
    if n.kind != kind:
        raise KindError(f"expected a term of kind {kind}, got {n.kind}")


GUARDS = ("arrow", "rec", "lift")


def _contractive(start: Node) -> bool:
    """No cycle avoiding arrow and record constructors."""
    on_path = set()
    done = set()

    def visit(n):
        if n.id in done:
            return True
        if n.id in on_path:
            return False
        if n.tag in GUARDS:
            return True
        on_path.add(n.id)
        ok = all(visit(c) for c in _children(n))
        on_path.discard(n.id)
        if ok:
            done.add(n.id)
        return ok

    return visit(start)


def _children(n: Node):
    if n.tag == "ph":
        return [n.target] if n.target is not None else []
    if n.tag in ("or", "and", "not"):
        return list(n.args[:2]) if n.tag != "not" else [n.args[0]]
    if n.tag == "row":
        return [f for _, f in n.fields]
    if n.tag == "rowx":
        return [f for _, f in n.fields] + [n.args[1]]
    if n.tag in ("arrow",):
        return list(n.args)
    if n.tag == "rec":
        return [f for _, f in n.fields]
    if n.tag == "lift":
        return [n.args[0]]
    return []


def kind_check(n: Node) -> Kind:
    """Kinds are checked when nodes are built; this re-validates the invariants."""
    n = deref(n)
    if n.tag == "rec":
        n.store._check_tail(n.tail, n.labels)
    elif n.tag == "row":
        if n.labels & n.args[2]:
            raise KindError("row fields overlap the excluded labels")
        n.store._check_tail(n.tail, n.labels | n.args[2])
    elif n.tag in ("or", "and"):
        _join_kind(n.args[0].kind, n.args[1].kind)
    return n.kind


# -- field lookup ---------------------------------------------------------

def atom_field(atom: Node, label: str) -> Node:
    """The field-type an atom assigns to ``label``."""
    s = atom.store
    if atom.tag == "row" and label in atom.args[2]:
        raise KindError(f"label {label} is excluded from this row")
    for l, f in atom.fields:
        if l == label:
            return f
    return default_field(s, atom.tail)


def default_field(s: Store, tail: Tail) -> Node:
    return s.undef if tail == CLOSED else s.field_top


def rectorow(t: Node) -> Node:
    """Reinterpret a Boolean combination of record atoms as rows over all labels."""
    s = t.store
    t = deref(t)
    if t.tag == "rec":
        return s.row(t.fields, t.tail, ())
    if t.tag == "bot":
        return s.bot(row_kind(()))
    if t.tag == "or":
        return s.or_(rectorow(t.args[0]), rectorow(t.args[1]))
    if t.tag == "and":
        return s.and_(rectorow(t.args[0]), rectorow(t.args[1]))
    if t.tag == "not":
        if t.args[0].tag == "bot":
            return s.top(row_kind(()))
        return s.neg(rectorow(t.args[0]))
    if t.tag == "lift" and t.args[2] is None:
        return s.lift(t.args[0], t.args[1], frozenset())
    raise TypeError(f"not a combination of record atoms: {t!r}")


# -- projections on rows --------------------------------------------------

def project(r: Node, label: str) -> Node:
    """Field ``label`` of an atom-shaped row term."""
    s = r.store
    r = deref(r)
    if r.tag == "row":
        if isinstance(r.tail, Var) and label not in r.labels:
            return s.var(s.proj_var(r.tail, label))
        return atom_field(r, label)
    if r.tag == "rowx":
        for l, f in r.fields:
            if l == label:
                return f
        return project(r.args[1], label)
    if r.tag == "bot":
        return s.bot_field
    if r.tag == "or":
        return s.or_(project(r.args[0], label), project(r.args[1], label))
    raise ProjectionError(f"cannot project field {label} of {r!r}")


def cut(r: Node, labels: Iterable[str]) -> Node:
    """Restrict an atom-shaped row term away from ``labels``."""
    s = r.store
    M = frozenset(labels)
    r = deref(r)
    if r.tag == "bot":
        return s.bot(row_kind(r.kind.excluded | M))
    if not M:
        return r
    if r.tag == "row":
        excl = r.args[2] | M
        fs = tuple((l, f) for l, f in r.fields if l not in M)
        tail = r.tail
        if isinstance(tail, Var):
            tail = s.cut_var(tail, M - r.labels)
        return s.row(fs, tail, excl)
    if r.tag == "rowx":
        fs = tuple((l, f) for l, f in r.fields if l not in M)
        inner = cut(r.args[1], M - frozenset(l for l, _ in r.fields))
        return s.rowx(fs, inner, r.args[2] | M)
    if r.tag == "or":
        return s.or_(cut(r.args[0], M), cut(r.args[1], M))
    raise ProjectionError(f"cannot cut {sorted(M)} from {r!r}")


# -- DNF --------------------------------------------------------------------

def _product(xs: list, ys: list, combine) -> list:
    out = []
    seen = set()
    for a in xs:
        for b in ys:
            c = combine(a, b)
            if c is not None and c not in seen:
                seen.add(c)
                out.append(c)
    return out


def _union(xs: list, ys: list) -> list:
    seen = set(xs)
    return xs + [y for y in ys if y not in seen]


def _combine_type(a: TypeSummand, b: TypeSummand) -> Optional[TypeSummand]:
    P = a.P | b.P
    N = a.N | b.N
    Vp = a.Vp | b.Vp
    Vn = a.Vn | b.Vn
    if P & N or Vp & Vn:
        return None
    worlds = {world_of(x) for x in P}
    if len(worlds) > 1:
        return None
    if len([x for x in P if x.tag == "basic"]) > 1:
        return None
    return TypeSummand(P, N, Vp, Vn)


def _combine_field(a: FieldSummand, b: FieldSummand) -> Optional[FieldSummand]:
    P = a.P | b.P
    N = a.N | b.N
    Vp = a.Vp | b.Vp
    Vn = a.Vn | b.Vn
    if P & N or Vp & Vn:
        return None
    u = a.undef
    if b.undef is not None:
        if u is not None and u != b.undef:
            return None
        u = b.undef
    if u is True and P:
        return None
    return FieldSummand(P, N, Vp, Vn, u)


def _combine_row(a: RowSummand, b: RowSummand) -> Optional[RowSummand]:
    P = a.P | b.P
    N = a.N | b.N
    if P & N:
        return None
    return RowSummand(P, N)


def to_dnf(n: Node) -> Dnf:
    """Disjunctive normal form of a type, field-type or row."""
    return Dnf(dnf(n, True), n.kind)


def dnf(n: Node, pos: bool = True) -> list:
    s = n.store
    key = (n.id, pos)
    hit = s.dnf_cache.get(key)
    if hit is not None:
        return hit
    if n.kind == TYPE:
        res = _dnf_type(n, pos)
    elif n.kind == FIELD:
        res = _dnf_field(n, pos)
    else:
        res = _dnf_row(n, pos)
    s.dnf_cache[key] = res
    return res


def _connective(n, pos, kind_tag, literal, combine, empty):
    t = n.tag
    if t == "ph":
        if n.target is None:
            raise ProjectionError("unbound recursive placeholder")
        return dnf(n.target, pos)
    if t == "bot":
        return [] if pos else [empty]
    if t == "not":
        return dnf(n.args[0], not pos) if n.args[0].kind.tag == kind_tag else literal(n.args[0], not pos)
    if t in ("or", "and"):
        a, b = n.args
        da = dnf(a, pos) if a.kind.tag == kind_tag else literal(a, pos)
        db = dnf(b, pos) if b.kind.tag == kind_tag else literal(b, pos)
        if (t == "or") == pos:
            return _union(da, db)
        return _product(da, db, combine)
    return None


def _dnf_type(n, pos):
    def literal(a, p):
        a = deref(a)
        if a.tag == "var":
            v = frozenset([a.args[0]])
            return [TypeSummand(frozenset(), frozenset(), v, frozenset())] if p else \
                [TypeSummand(frozenset(), frozenset(), frozenset(), v)]
        if a.tag in ("basic", "arrow", "rec"):
            one = frozenset([a])
            return [TypeSummand(one, frozenset())] if p else [TypeSummand(frozenset(), one)]
        return dnf(a, p)

    empty = TypeSummand(frozenset(), frozenset())
    res = _connective(n, pos, "type", literal, _combine_type, empty)
    if res is not None:
        return res
    if n.tag == "lift":
        inner, L, _ = n.args
        s = n.store
        out = []
        for rs in dnf(inner, pos):
            P = frozenset(s._lift_atom(a, L, None) for a in rs.P)
            N = frozenset(s._lift_atom(a, L, None) for a in rs.N)
            if not P & N:
                out.append(TypeSummand(P, N))
        return out
    return literal(n, pos)


def _dnf_field(n, pos):
    def literal(a, p):
        a = deref(a)
        if a.kind == TYPE:
            one = frozenset([a])
            # a type never contains undef, so its field complement does
            return [FieldSummand(one, frozenset())] if p else [FieldSummand(frozenset(), one)]
        if a.tag == "undef":
            return [FieldSummand(frozenset(), frozenset(), undef=p)]
        if a.tag == "var":
            v = frozenset([a.args[0]])
            return [FieldSummand(frozenset(), frozenset(), v, frozenset())] if p else \
                [FieldSummand(frozenset(), frozenset(), frozenset(), v)]
        return dnf(a, p)

    empty = FieldSummand(frozenset(), frozenset())
    res = _connective(n, pos, "field", literal, _combine_field, empty)
    if res is not None:
        return res
    return literal(n, pos)


def _dnf_row(n, pos):
    s = n.store

    def literal(a, p):
        a = deref(a)
        if a.tag == "row":
            one = frozenset([a])
            return [RowSummand(one, frozenset())] if p else [RowSummand(frozenset(), one)]
        return dnf(a, p)

    empty = RowSummand(frozenset(), frozenset())
    res = _connective(n, pos, "row", literal, _combine_row, empty)
    if res is not None:
        return res
    if n.tag == "lift":
        inner, L, target = n.args
        out = []
        for rs in dnf(inner, pos):
            P = frozenset(s._lift_atom(a, L, target) for a in rs.P)
            N = frozenset(s._lift_atom(a, L, target) for a in rs.N)
            if not P & N:
                out.append(RowSummand(P, N))
        return out
    if n.tag == "rowx":
        fs, inner, excl = n.args
        head = s.row(fs, OPEN, excl)
        lifted = s.lift(inner, frozenset(l for l, _ in fs), excl)
        both = s.and_(head, lifted)
        return dnf(both, pos)
    return literal(n, pos)


def summand_node(s: Store, sm) -> Node:
    """Rebuild a term from one summand."""
    if isinstance(sm, TypeSummand):
        parts = list(sm.P) + [s.var(v) for v in sm.Vp]
        parts += [s.neg(a) for a in sm.N] + [s.neg(s.var(v)) for v in sm.Vn]
        return s.inter(sorted(parts, key=_nid), TYPE)
    if isinstance(sm, FieldSummand):
        parts = list(sm.P) + [s.var(v) for v in sm.Vp]
        parts += [s.neg(a, FIELD) for a in sm.N] + [s.neg(s.var(v), FIELD) for v in sm.Vn]
        if sm.undef is True:
            parts.append(s.undef)
        elif sm.undef is False:
            parts.append(s.any)
        return s.inter(sorted(parts, key=_nid), FIELD)
    raise TypeError("row summands need an explicit kind; use row_summand_node")


def row_summand_node(s: Store, sm: RowSummand, kind: Kind) -> Node:
    parts = list(sm.P) + [s.neg(a) for a in sm.N]
    return s.inter(sorted(parts, key=_nid), kind)


def dnf_node(n: Node) -> Node:
    """The DNF of ``n`` reassembled as a term."""
    s = n.store
    if n.kind.tag == "row":
        return s.union((row_summand_node(s, sm, n.kind) for sm in dnf(n)), n.kind)
    return s.union((summand_node(s, sm) for sm in dnf(n)), n.kind)


def field_type_part(s: Store, sm: FieldSummand) -> Node:
    """The ordinary-type portion of a field summand (bottom if undef is required)."""
    if sm.undef is True:
        return s.bot_type
    parts = sorted(sm.P, key=_nid) + [s.neg(a) for a in sorted(sm.N, key=_nid)]
    return s.inter(parts, TYPE)


def vars_of(n: Node) -> set:
    """All variables occurring in ``n`` (derived variables included as such)."""
    out = set()
    seen = set()
    stack = [n]
    while stack:
        x = stack.pop()
        if x.id in seen:
            continue
        seen.add(x.id)
        if x.tag == "var":
            out.add(x.args[0])
        elif x.tag in ("rec", "row") and isinstance(x.tail, Var):
            out.add(x.tail)
        stack.extend(_children(x))
    return out
