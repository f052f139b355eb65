"""Expressions of the record calculus and the algorithmic type checker.

Two modes are offered.  ``practical`` replaces instantiation searches by
plain subtyping side conditions wherever possible; ``complete`` always
searches for instances with tallying, within the configured budgets.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

from .core import (
    FIELD, OPEN, TYPE, KindError, Node, Store, Var, atom_field, cut, dnf, field_type_part,
    row_kind, summand_node, vars_of,
)
from .subst import apply
from .subtype import empty_row, is_empty, is_subtype
from .tally import Fuel, FuelExhausted, apply_result, apply_types, domain, leq_sub

PRACTICAL = "practical"
COMPLETE = "complete"


# -- expressions -------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: object


@dataclass(frozen=True)
class Name:
    name: str


@dataclass(frozen=True)
class App:
    fun: object
    arg: object


@dataclass(frozen=True)
class Abs:
    annot: tuple  # nonempty tuple of (domain, codomain) pairs
    param: str
    body: object


@dataclass(frozen=True)
class EmptyRec:
    pass


@dataclass(frozen=True)
class Ext:
    rec: object
    label: str
    value: object


@dataclass(frozen=True)
class Sel:
    rec: object
    label: str


@dataclass(frozen=True)
class Del:
    rec: object
    label: str


def is_value(e) -> bool:
    if isinstance(e, (Const, Abs, EmptyRec)):
        return True
    return isinstance(e, Ext) and is_value(e.rec) and is_value(e.value)


# -- errors ------------------------------------------------------------------

class TypeCheckError(Exception):
    def __init__(self, rule: str, msg: str):
        super().__init__(f"[{rule}] {msg}")
        self.rule = rule
        self.msg = msg


class BudgetExceeded(TypeCheckError):
    """No instantiation was found within the search budgets (not a proof of ill-typedness)."""


# -- type operators ----------------------------------------------------------

def _record_summands(t: Node) -> list:
    """Nonempty record summands of ``t`` as (positive atoms, negative atoms), variables erased."""
    s = t.store
    out = []
    for sm in dnf(t):
        if sm.world != "record" or is_empty(summand_node(s, sm)):
            continue
        N = [a for a in sm.N if a.tag == "rec"]
        out.append((sorted(sm.P, key=lambda a: a.id), sorted(N, key=lambda a: a.id)))
    return out


def _as_row(a: Node) -> Node:
    return a.store.row(a.fields, a.tail, ())


def sel_type(t: Node, label: str) -> Node:
    """The least type ``s`` with ``t`` below the open record mapping ``label`` to ``s``."""
    s = t.store
    if not is_subtype(t, s.record([(label, s.any)], OPEN)):
        raise ValueError(f"field {label} may be absent")
    rk = row_kind([label])
    out = s.bot_field
    for P, N in _record_summands(t):
        here = s.inter((atom_field(a, label) for a in P), FIELD)
        rest_pos = s.inter((cut(_as_row(a), [label]) for a in P), rk)
        for k in range(len(N) + 1):
            for keep in combinations(range(len(N)), k):
                # atoms in ``keep`` are refuted by the other labels, the rest by ``label``
                rest = rest_pos
                for i in keep:
                    rest = s.and_(rest, s.neg(cut(_as_row(N[i]), [label])))
                if empty_row(rest):
                    continue
                f = here
                for i in range(len(N)):
                    if i not in keep:
                        f = s.and_(f, s.neg(atom_field(N[i], label), FIELD))
                out = s.or_(out, f)
    if out.kind == TYPE:
        return out
    return s.union((field_type_part(s, sm) for sm in dnf(out)), TYPE)


def del_field(t: Node, label: str) -> Node:
    """The row describing the labels of ``t`` other than ``label``."""
    s = t.store
    if not is_subtype(t, s.record([], OPEN)):
        raise ValueError("not a record type")
    rk = row_kind([label])
    out = s.bot(rk)
    for P, N in _record_summands(t):
        part = s.top(rk)
        for a in P:
            part = s.and_(part, _del_positive(a, label))
        for a in N:
            part = s.and_(part, _del_negative(a, label))
        out = s.or_(out, part)
    return out


def _del_positive(a: Node, label: str) -> Node:
    s = a.store
    fs = [(l, f) for l, f in a.fields if l != label]
    if label in a.labels or not isinstance(a.tail, Var):
        return s.row(fs, a.tail, [label])
    # the tail variable covers the label: forget what it says about the others
    return s.row(fs, OPEN, [label])


def _del_negative(a: Node, label: str) -> Node:
    s = a.store
    rk = row_kind([label])
    fs = [(l, f) for l, f in a.fields if l != label]
    if label in a.labels:
        if is_subtype(s.field_top, a.field_map()[label]):
            return s.neg(s.row(fs, a.tail, [label]))
        return s.top(rk)
    if a.tail == OPEN:
        return s.neg(s.row(fs, OPEN, [label]))
    return s.top(rk)


# -- checker -----------------------------------------------------------------

@dataclass
class Options:
    mode: str = PRACTICAL
    max_card: int = 2
    budget: int = 4
    fuel: int = 200_000
    all_solutions: bool = False

    def __post_init__(self):
        if self.mode not in (PRACTICAL, COMPLETE):
            raise ValueError(f"unknown mode {self.mode}")
        if self.max_card < 1 or self.budget < 2 or self.fuel < 1:
            raise ValueError("budgets must be positive (dove-tail budget at least 2)")


@dataclass
class TypeEnv:
    gamma: dict = field(default_factory=dict)
    delta: frozenset = frozenset()

    def bind(self, x: str, t: Node) -> "TypeEnv":
        g = dict(self.gamma)
        g[x] = t
        return TypeEnv(g, self.delta)

    def freeze(self, vs) -> "TypeEnv":
        return TypeEnv(self.gamma, self.delta | {v.root for v in vs})


class Checker:
    def __init__(self, store: Store, options: Optional[Options] = None):
        self.s = store
        self.opt = options or Options()
        # applications that admitted several result types, as (function, argument, candidates)
        self.alternatives = []

    @property
    def complete(self):
        return self.opt.mode == COMPLETE

    def fuel(self):
        return Fuel(self.opt.fuel)

    def type_of(self, env: TypeEnv, e) -> Node:
        s = self.s
        if isinstance(e, Const):
            return const_type(s, e.value)
        if isinstance(e, Name):
            if e.name not in env.gamma:
                raise TypeCheckError("Var", f"unbound variable {e.name}")
            return env.gamma[e.name]
        if isinstance(e, EmptyRec):
            return s.record([])
        if isinstance(e, Abs):
            return self.abstraction(env, e)
        if isinstance(e, App):
            return self.application(env, self.type_of(env, e.fun), self.type_of(env, e.arg))
        if isinstance(e, Sel):
            t = self.type_of(env, e.rec)
            t = self.instantiate(env, t, s.record([(e.label, s.any)], OPEN), "Sel",
                                 f"field {e.label} may be absent")
            return sel_type(t, e.label)
        if isinstance(e, Ext):
            t = self.type_of(env, e.rec)
            t = self.instantiate(env, t, s.record([(e.label, s.undef)], OPEN), "Ext",
                                 f"field {e.label} may already be present")
            v = self.type_of(env, e.value)
            return s.record_with_row([(e.label, v)], del_field(t, e.label))
        if isinstance(e, Del):
            t = self.type_of(env, e.rec)
            t = self.instantiate(env, t, s.record([], OPEN), "Del", "not a record")
            return s.record_with_row([(e.label, s.undef)], del_field(t, e.label))
        raise TypeError(f"not an expression: {e!r}")

    def abstraction(self, env: TypeEnv, e: Abs) -> Node:
        s = self.s
        arrows = [s.arrow(a, b) for a, b in e.annot]
        inner = env.freeze(set().union(*(vars_of(a) for a in arrows)))
        for dom, cod in e.annot:
            body = self.type_of(inner.bind(e.param, dom), e.body)
            if is_subtype(body, cod):
                continue
            if self.search(lambda: leq_sub(body, cod, inner.delta, self.opt.max_card,
                                           self.fuel())) is None:
                raise TypeCheckError("Abs", f"body has type {body!r}, not below {cod!r}")
        return s.inter(arrows, TYPE)

    def application(self, env: TypeEnv, f: Node, x: Node) -> Node:
        s = self.s
        if not self.complete and is_subtype(f, s.arrow(s.bot_type, s.any)) \
                and is_subtype(x, domain(f)):
            return apply_result(f, x)
        found = self.search(lambda: apply_types(f, x, env.delta, self.opt.budget, self.fuel()))
        if len(found) > 1:
            self.alternatives.append((f, x, found))
        if not found:
            msg = f"cannot apply {f!r} to {x!r}"
            if self.complete:
                raise BudgetExceeded("App", msg + " within the search budget")
            raise TypeCheckError("App", msg)
        meet = s.inter(found, TYPE)
        return found[0] if is_empty(meet) else meet

    def instantiate(self, env: TypeEnv, t: Node, target: Node, rule: str, msg: str) -> Node:
        """``t`` itself when below ``target`` (practical mode), else the meet of instances that are."""
        s = self.s
        if not self.complete:
            if not is_subtype(t, target):
                raise TypeCheckError(rule, f"{msg}: {t!r}")
            return t
        sols = self.search(lambda: leq_sub(t, target, env.delta, self.opt.max_card, self.fuel()))
        if sols is None:
            raise BudgetExceeded(rule, f"{msg}: no instance of {t!r} found")
        return s.inter((apply(sigma, t) for sigma in sols), TYPE)

    def search(self, thunk):
        try:
            return thunk()
        except FuelExhausted as exc:
            raise BudgetExceeded("search", str(exc)) from exc


def const_type(s: Store, c) -> Node:
    if isinstance(c, bool):
        return s.basic("true" if c else "false")
    if isinstance(c, int):
        return s.basic("int")
    if isinstance(c, str):
        return s.basic("str")
    raise TypeError(f"unknown constant {c!r}")


def type_of(delta, gamma: dict, e, store: Store, mode: str = PRACTICAL, max_card: int = 2,
            budget: int = 4, fuel: int = 200_000) -> Node:
    """Type of ``e`` with monomorphic variables ``delta`` and environment ``gamma``."""
    env = TypeEnv(dict(gamma), frozenset(v.root for v in delta))
    opts = Options(mode=mode, max_card=max_card, budget=budget, fuel=fuel)
    return Checker(store, opts).type_of(env, e)


def check_value(v, t: Node) -> bool:
    """Whether the value ``v`` has type ``t``."""
    try:
        return is_subtype(type_of((), {}, v, t.store), t)
    except TypeCheckError:
        return False


@dataclass
class Checked:
    name: str
    type: Optional[Node] = None
    error: Optional[Exception] = None


def check_declarations(store: Store, decls, options: Optional[Options] = None) -> list:
    """Type each declaration in order; annotated names enter the environment at their annotation."""
    checker = Checker(store, options)
    env = TypeEnv()
    out = []
    for d in decls:
        try:
            t = checker.type_of(env, d.expr)
            if d.annot is not None:
                if not is_subtype(t, d.annot) and checker.search(
                        lambda: leq_sub(t, d.annot, env.delta, checker.opt.max_card,
                                        checker.fuel())) is None:
                    raise TypeCheckError("Decl", f"{d.name} has type {t!r}, not {d.annot!r}")
                t = d.annot
        except (TypeCheckError, KindError) as exc:
            out.append(Checked(d.name, error=exc))
            continue
        env = env.bind(d.name, t)
        out.append(Checked(d.name, type=t))
    return out
