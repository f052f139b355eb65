"""Brute-force deciders used as test oracles for record and row emptiness.

These follow the quantified characterisation over all maps from negative
atoms to labels-or-blank literally, with no pruning, so they do not share
the control structure of the production algorithm.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import chain, combinations, product
from typing import Iterable

from .core import CLOSED, FIELD, OPEN, Node, Store, Var, atom_field
from .subtype import empty_row, is_subtype

BLANK = "_"


def _default(s: Store, r: Node) -> Node:
    return s.undef if r.tail == CLOSED else s.field_top


def _labels(atoms) -> list:
    return sorted(set(chain.from_iterable(a.labels for a in atoms)))


def _check_space(P, N):
    spaces = {a.kind for a in chain(P, N)}
    if len(spaces) > 1:
        raise ValueError("atoms do not share a definition space")


def iota_maps(N: list, L: list):
    """All total maps from ``N`` to ``L`` plus the blank."""
    for choice in product(list(L) + [BLANK], repeat=len(N)):
        yield dict(zip(N, choice))


def naive_empty_row(P: Iterable[Node], N: Iterable[Node]) -> bool:
    """Whether the meet of the atomic rows ``P`` lies within the join of ``N``."""
    P = sorted(P, key=lambda a: a.id)
    N = sorted(N, key=lambda a: a.id)
    _check_space(P, N)
    if not P and not N:
        return False
    s = (P or N)[0].store
    L = _labels(P + N)
    meet = {l: s.inter((atom_field(r, l) for r in P), FIELD) for l in L}
    meet_def = s.inter((_default(s, r) for r in P), FIELD)
    pvars = {r.tail for r in P if isinstance(r.tail, Var)}
    for iota in iota_maps(N, L):
        if any(is_subtype(meet[l], s.union((atom_field(r, l) for r in N if iota[r] == l), FIELD))
               for l in L):
            continue
        blank = [r for r in N if iota[r] == BLANK]
        if any(not isinstance(r.tail, Var) and is_subtype(meet_def, _default(s, r)) for r in blank):
            continue
        if any(isinstance(r.tail, Var) and r.tail in pvars for r in blank):
            continue
        return False
    return True


def cutrow(r: Node, L: Iterable[str]) -> Node:
    """Remove labels ``L`` from an atomic row, opening a variable tail that covered any of them."""
    s = r.store
    L = frozenset(L)
    fields = [(l, f) for l, f in r.fields if l not in L]
    tail = r.tail
    if isinstance(tail, Var) and not L <= (r.labels | r.args[2]):
        tail = OPEN
    return s.row(fields, tail, r.args[2] | L)


@dataclass
class Residual:
    """The three alternative conditions attached to one (iota, N') choice."""
    fields: list        # (meet over P, join over iota^-1(l)) per label
    cut_pos: list
    cut_neg: list
    var_pos: list
    var_neg: list

    def holds(self) -> bool:
        if any(is_subtype(a, b) for a, b in self.fields):
            return True
        if self.cut_pos or self.cut_neg:
            if _rows_covered(self.cut_pos, self.cut_neg):
                return True
        if self.var_neg or self.var_pos:
            if _rows_covered(self.var_pos, self.var_neg):
                return True
        return False


def _rows_covered(P, N) -> bool:
    if not P and not N:
        return False
    s = (P or N)[0].store
    k = (P or N)[0].kind
    meet = s.inter(P, k)
    join = s.union(N, k)
    return empty_row(s.and_(meet, s.neg(join)))


def naive_decompose(P: Iterable[Node], N: Iterable[Node], L: Iterable[str]) -> list:
    """Residual problems of the general row decomposition over labels ``L``.

    The original inclusion holds iff every residual holds.
    """
    P = sorted(P, key=lambda a: a.id)
    N = sorted(N, key=lambda a: a.id)
    L = sorted(set(L))
    _check_space(P, N)
    if not P and not N:
        return []
    s = (P or N)[0].store
    Lset = frozenset(L)

    def covers(r):
        return isinstance(r.tail, Var) and bool(Lset - r.tail.kind.excluded)

    pv = [r for r in P if covers(r)]
    nv = [r for r in N if covers(r)]
    meet = {l: s.inter((atom_field(r, l) for r in P), FIELD) for l in L}
    top = s.top(P[0].kind if P else N[0].kind)
    out = []
    for iota in iota_maps(N, L):
        blank = [r for r in N if iota[r] == BLANK]
        blank_vars = [r for r in blank if r in nv]
        for k in range(len(blank_vars) + 1):
            for Nprime in combinations(blank_vars, k):
                fields = [(meet[l], s.union((atom_field(r, l) for r in N if iota[r] == l), FIELD))
                          for l in L]
                cut_pos = [cutrow(r, L) for r in P] or [cutrow(top, L)]
                cut_neg = [cutrow(r, L) for r in blank if r not in Nprime]
                var_pos = [s.row([(l, s.field_top) for l in sorted(r.labels)], r.tail, r.args[2])
                           for r in pv] or [top]
                var_neg = [s.row([(l, s.field_top) for l in sorted(r.labels)], r.tail, r.args[2])
                           for r in Nprime]
                out.append(Residual(fields, cut_pos, cut_neg, var_pos, var_neg))
    return out


# -- instance generation ------------------------------------------------------

LABELS = ("a", "b", "c")


@dataclass
class Bounds:
    labels: int = 3
    row_vars: int = 2
    positives: int = 2
    negatives: int = 2
    depth: int = 2


def gen_field(s: Store, rng: random.Random, depth: int) -> Node:
    leaves = [s.basic("int"), s.basic("true"), s.basic("false"), s.basic("bool"),
              s.undef, s.field_top, s.any, s.bot_type]
    if depth <= 0 or rng.random() < 0.45:
        return rng.choice(leaves)
    op = rng.choice(("or", "and", "not"))
    a = gen_field(s, rng, depth - 1)
    if op == "not":
        return s.neg(a, FIELD)
    b = gen_field(s, rng, depth - 1)
    return s.or_(a, b) if op == "or" else s.and_(a, b)


def gen_atom(s: Store, rng: random.Random, bounds: Bounds, rowvars: list) -> Node:
    labels = LABELS[:bounds.labels]
    kind = rng.random()
    if rowvars and kind < 0.4:
        rho = rng.choice(rowvars)
        fin = sorted(rho.kind.excluded)
        return s.row([(l, gen_field(s, rng, bounds.depth)) for l in fin], rho, ())
    chosen = sorted(l for l in labels if rng.random() < 0.6)
    tail = CLOSED if kind < 0.7 else OPEN
    return s.row([(l, gen_field(s, rng, bounds.depth)) for l in chosen], tail, ())


def gen_instances(s: Store, seed: int = 0, bounds: Bounds = Bounds(), count: int = None):
    """Deterministic stream of (P, N, Vp) row problems of definition space all labels."""
    rng = random.Random(seed)
    labels = LABELS[:bounds.labels]
    produced = 0
    while count is None or produced < count:
        rowvars = []
        for i in range(rng.randint(0, bounds.row_vars)):
            fin = tuple(l for l in labels if rng.random() < 0.5)
            rowvars.append(s.rvar(f"q{i}_{''.join(fin)}", fin))
        P = [gen_atom(s, rng, bounds, rowvars) for _ in range(rng.randint(1, bounds.positives))]
        N = [gen_atom(s, rng, bounds, rowvars) for _ in range(rng.randint(0, bounds.negatives))]
        vp = frozenset(a.tail for a in P if isinstance(a.tail, Var))
        yield P, N, vp
        produced += 1


def row_to_record(r: Node) -> Node:
    """View an atomic row over all labels as a record atom."""
    return r.store.record(r.fields, r.tail)
