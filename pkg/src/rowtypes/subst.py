"""Substitutions over type, field and row variables."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .core import FIELD, Node, Store, Var, cut, project, vars_of


@dataclass
class Substitution:
    bindings: dict = field(default_factory=dict)

    def __post_init__(self):
        for v, t in list(self.bindings.items()):
            if t.kind != v.kind and not (v.kind == FIELD and t.kind.tag == "type"):
                raise TypeError(f"cannot bind {v!r} of kind {v.kind} to a term of kind {t.kind}")
            if t.tag == "var" and t.args[0] is v:
                del self.bindings[v]
            elif v.is_row and t.tag == "row" and not t.fields and t.tail is v:
                del self.bindings[v]

    def __contains__(self, v):
        return v in self.bindings

    def __getitem__(self, v):
        return self.bindings[v]

    def __iter__(self):
        return iter(self.bindings)

    def __len__(self):
        return len(self.bindings)

    def items(self):
        return self.bindings.items()

    def domain(self) -> set:
        return set(self.bindings)

    def restrict(self, keep: Iterable[Var]) -> "Substitution":
        keep = set(keep)
        return Substitution({v: t for v, t in self.bindings.items() if v in keep})

    def __repr__(self):
        inner = ", ".join(f"{v!r} := {t!r}" for v, t in
                          sorted(self.bindings.items(), key=lambda p: p[0].index))
        return "{" + inner + "}"


IDENTITY = Substitution()


class _Applier:
    def __init__(self, sigma: Substitution):
        self.b = sigma.bindings
        self.by_root = {}
        for v in self.b:
            self.by_root.setdefault(v.root, []).append(v)
        self.memo = {}
        self.progress = {}
        self.used = set()

    def row_of(self, v: Var) -> Optional[Node]:
        """The image of a (possibly derived) row variable, or None if unchanged."""
        if v in self.b:
            return self.b[v]
        best = None
        mine = v.cut or frozenset()
        for w in self.by_root.get(v.root, ()):
            if w.label is not None:
                continue
            theirs = w.cut or frozenset()
            if theirs <= mine and (best is None or len(theirs) > len(best.cut or ())):
                best = w
        if best is None:
            return None
        return cut(self.b[best], mine - (best.cut or frozenset()))

    def field_of(self, v: Var) -> Optional[Node]:
        if v in self.b:
            return self.b[v]
        if v.label is None:
            return None
        for w in self.by_root.get(v.root, ()):
            if w.label is None and v.label not in (w.cut or ()):
                return project(self.b[w], v.label)
        return None

    def go(self, n: Node) -> Node:
        hit = self.memo.get(n.id)
        if hit is not None:
            return hit
        if n.tag == "ph":
            res = self.go_ph(n)
        else:
            res = self.build(n)
        self.memo[n.id] = res
        return res

    def go_ph(self, n: Node) -> Node:
        if n.target is None:
            return n
        q = self.progress.get(n.id)
        if q is not None:
            self.used.add(n.id)
            return q
        s = n.store
        q = s.placeholder(n.kind)
        self.progress[n.id] = q
        body = self.go(n.target)
        del self.progress[n.id]
        if n.id in self.used:
            return s.bind(q, body)
        return body

    def build(self, n: Node) -> Node:
        s = n.store
        t = n.tag
        if t == "var":
            v = n.args[0]
            img = self.field_of(v) if v.kind == FIELD else self.b.get(v)
            return n if img is None else img
        if t in ("basic", "bot", "undef"):
            return n
        if t == "arrow":
            return s.arrow(self.go(n.args[0]), self.go(n.args[1]))
        if t == "or":
            return s.or_(self.go(n.args[0]), self.go(n.args[1]))
        if t == "and":
            return s.and_(self.go(n.args[0]), self.go(n.args[1]))
        if t == "not":
            return s.neg(self.go(n.args[0]), n.kind)
        if t in ("rec", "row"):
            fields = [(l, self.go(f)) for l, f in n.fields]
            img = self.row_of(n.tail) if isinstance(n.tail, Var) else None
            if t == "rec":
                if img is None:
                    return s.record(fields, n.tail)
                return s.record_with_row(fields, img)
            if img is None:
                return s.row(fields, n.tail, n.args[2])
            return s.rowx(fields, img, n.args[2])
        if t == "rowx":
            fields = [(l, self.go(f)) for l, f in n.fields]
            return s.rowx(fields, self.go(n.args[1]), n.args[2])
        if t == "lift":
            return s.lift(self.go(n.args[0]), n.args[1], n.args[2])
        raise TypeError(f"cannot substitute into {t}")


def apply(sigma: Substitution, t: Node) -> Node:
    """Apply ``sigma`` to ``t`` (identity if the domain is empty)."""
    if not sigma.bindings:
        return t
    return _Applier(sigma).go(t)


def compose(sigma2: Substitution, sigma1: Substitution, store: Store = None) -> Substitution:
    """The substitution applying ``sigma1`` then ``sigma2``."""
    out = {v: apply(sigma2, t) for v, t in sigma1.items()}
    if sigma2.bindings:
        s = store or next(iter(sigma2.bindings.values())).store
        for v, t in sigma2.items():
            if v in out:
                continue
            if sigma1.bindings and apply(sigma1, s.var(v)) is not s.var(v):
                continue
            out[v] = t
    return Substitution(out)


def freshen(store: Store, t: Node, avoid: Iterable[Var] = ()) -> tuple:
    """Rename every variable of ``t`` outside ``avoid`` to a fresh one."""
    avoid = set(avoid)
    ren = {}
    for v in sorted(vars_of(t), key=lambda v: v.index):
        root = v.root
        if root in avoid or v in avoid or root in ren:
            continue
        w = store.fresh(root.kind, root.name)
        ren[root] = store.var(w)
    sigma = Substitution(ren)
    return apply(sigma, t), sigma


def term_vars(t: Node) -> set:
    """Variables of ``t``, reporting derived row variables by their base."""
    return {v.root for v in vars_of(t)}
