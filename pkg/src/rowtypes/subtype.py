"""Emptiness and subtyping for types, field-types and rows."""
from __future__ import annotations

from itertools import combinations

from .core import (
    BASICS, CLOSED, FIELD, OPEN, TYPE, WORLDS, Node, Var, atom_field,
    dnf, field_type_part, world_of,
)

INF = float("inf")


def is_empty(t: Node) -> bool:
    """True iff ``t`` denotes no value (variables at top level are ignored)."""
    if t.kind == TYPE:
        return all(_type_summand_empty(t.store, sm) for sm in dnf(t))
    if t.kind == FIELD:
        return empty_field(t)
    return empty_row(t)


def is_subtype(t1: Node, t2: Node) -> bool:
    s = t1.store
    k = t1.kind if t1.kind == t2.kind else FIELD
    return is_empty(s.and_(t1, s.neg(t2, k)))


def is_equiv(t1: Node, t2: Node) -> bool:
    return is_subtype(t1, t2) and is_subtype(t2, t1)


def empty_field(tau: Node) -> bool:
    if tau.kind == TYPE:
        return is_empty(tau)
    s = tau.store
    for sm in dnf(tau):
        if sm.undef is not False and not sm.P:
            return False  # undef inhabits the summand
        if not is_empty(field_type_part(s, sm)):
            return False
    return True


def empty_row(r: Node) -> bool:
    s = r.store
    return all(_memo(s, ("row", sm.P, sm.N), lambda sm=sm: empty_record(sm.P, sm.N))
               for sm in dnf(r))


def _type_summand_empty(s, sm) -> bool:
    w = sm.world
    if w is not None:
        N = frozenset(a for a in sm.N if world_of(a) == w)
        return _world_empty(s, w, sm.P, N)
    return all(_world_empty(s, wd, frozenset(), frozenset(a for a in sm.N if world_of(a) == wd))
               for wd in WORLDS)


def _world_empty(s, w, P, N) -> bool:
    if w == "basic":
        return empty_basic(P, N)
    if w == "arrow":
        return _memo(s, (w, P, N), lambda: empty_arrow(P, N))
    return _memo(s, (w, P, N), lambda: empty_record(P, N))


def _memo(s, key, compute) -> bool:
    """Coinductive memoization: a summand under examination is assumed empty."""
    hit = s.decided.get(key)
    if hit is not None:
        return hit
    depth = s.assumed.get(key)
    if depth is not None:
        s.low = min(s.low, depth)
        return True
    depth = len(s.assumed)
    s.assumed[key] = depth
    outer = s.low
    s.low = INF
    try:
        res = compute()
    finally:
        del s.assumed[key]
    used = s.low
    if not res or used >= depth:
        s.decided[key] = res
        used = INF
    s.low = min(outer, used)
    return res


def empty_basic(P, N) -> bool:
    names = {a.args[0] for a in P}
    negs = {a.args[0] for a in N}
    if len(names) > 1:
        return True
    if names:
        return next(iter(names)) in negs
    return set(BASICS) <= negs


def empty_arrow(P, N) -> bool:
    if not N:
        return False
    s = next(iter(N)).store
    P = sorted(P, key=lambda a: a.id)
    for n in sorted(N, key=lambda a: a.id):
        dom, cod = n.args
        if _arrow_covered(s, dom, cod, P):
            return True
    return False


def _arrow_covered(s, dom, cod, P) -> bool:
    for k in range(len(P) + 1):
        for sub in combinations(range(len(P)), k):
            chosen = [P[i] for i in sub]
            rest = [P[i] for i in range(len(P)) if i not in sub]
            if is_subtype(dom, s.union((p.args[0] for p in chosen), TYPE)):
                continue
            if rest and is_subtype(s.inter((p.args[1] for p in rest), TYPE), cod):
                continue
            return False
    return True


def merge_positive(P, labels) -> tuple:
    """Field-wise meet of the positive atoms over ``labels``, plus the merged tail."""
    atoms = sorted(P, key=lambda a: a.id)
    s = atoms[0].store if atoms else None
    fields = {}
    for l in labels:
        f = s.field_top
        for a in atoms:
            f = s.and_(f, atom_field(a, l))
        fields[l] = f
    tail = CLOSED if any(a.tail == CLOSED for a in atoms) else OPEN
    vp = frozenset(a.tail for a in atoms if isinstance(a.tail, Var))
    return fields, tail, vp


def empty_record(P, N) -> bool:
    """Emptiness of an intersection of record (or row) atoms and negated atoms."""
    if not P and not N:
        return False
    store = next(iter(P or N)).store
    labels = sorted(set().union(*(a.labels for a in list(P) + list(N))))
    if P:
        fields, tail, vp = merge_positive(P, labels)
    else:
        fields, tail, vp = {l: store.field_top for l in labels}, OPEN, frozenset()
    if any(empty_field(f) for f in fields.values()):
        return True
    return phi(fields, tail, vp, sorted(N, key=lambda a: a.id))


def phi(fields: dict, tail, vp, N) -> bool:
    """Whether the monomorphic record ``fields``/``tail`` meets the row variables
    ``vp`` only inside the union of the atoms ``N``."""
    if not N:
        return False
    R, rest = N[0], N[1:]
    if not (R.tail == OPEN or R.tail == tail or R.tail in vp):
        return phi(fields, tail, vp, rest)
    s = R.store
    for l, f in fields.items():
        g = atom_field(R, l)
        remainder = s.and_(f, s.neg(g, FIELD))
        if empty_field(remainder):
            continue
        narrowed = dict(fields)
        narrowed[l] = remainder
        if not phi(narrowed, tail, vp, rest):
            return False
    return True

