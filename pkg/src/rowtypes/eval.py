"""Call-by-value small-step reduction for the record calculus."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

from .typing import Abs, App, Const, Del, EmptyRec, Ext, Name, Sel, is_value

_counter = itertools.count()


def free_names(e) -> set:
    if isinstance(e, Name):
        return {e.name}
    if isinstance(e, Abs):
        return free_names(e.body) - {e.param}
    if isinstance(e, App):
        return free_names(e.fun) | free_names(e.arg)
    if isinstance(e, Ext):
        return free_names(e.rec) | free_names(e.value)
    if isinstance(e, (Sel, Del)):
        return free_names(e.rec)
    return set()


def substitute(e, x: str, v):
    """``e`` with the free occurrences of ``x`` replaced by ``v``, renaming binders as needed."""
    if isinstance(e, Name):
        return v if e.name == x else e
    if isinstance(e, (Const, EmptyRec)):
        return e
    if isinstance(e, App):
        return App(substitute(e.fun, x, v), substitute(e.arg, x, v))
    if isinstance(e, Ext):
        return Ext(substitute(e.rec, x, v), e.label, substitute(e.value, x, v))
    if isinstance(e, Sel):
        return Sel(substitute(e.rec, x, v), e.label)
    if isinstance(e, Del):
        return Del(substitute(e.rec, x, v), e.label)
    if isinstance(e, Abs):
        if e.param == x:
            return e
        if e.param in free_names(v):
            fresh = f"{e.param}_{next(_counter)}"
            body = substitute(e.body, e.param, Name(fresh))
            return Abs(e.annot, fresh, substitute(body, x, v))
        return Abs(e.annot, e.param, substitute(e.body, x, v))
    raise TypeError(f"not an expression: {e!r}")


def _reduce(e):
    """Contract ``e`` if it is a redex whose subterms are values, else None."""
    if isinstance(e, App) and isinstance(e.fun, Abs):
        return substitute(e.fun.body, e.fun.param, e.arg)
    if isinstance(e, Sel) and isinstance(e.rec, Ext):
        r = e.rec
        return r.value if r.label == e.label else Sel(r.rec, e.label)
    if isinstance(e, Del):
        r = e.rec
        if isinstance(r, EmptyRec):
            return r
        if isinstance(r, Ext):
            if r.label == e.label:
                return Del(r.rec, e.label)
            return Ext(Del(r.rec, e.label), r.label, r.value)
    return None


def step(e) -> Optional[object]:
    """One reduction step, or None when ``e`` is a value or stuck."""
    if is_value(e):
        return None
    if isinstance(e, App):
        if not is_value(e.fun):
            f = step(e.fun)
            return None if f is None else App(f, e.arg)
        if not is_value(e.arg):
            a = step(e.arg)
            return None if a is None else App(e.fun, a)
        return _reduce(e)
    if isinstance(e, Ext):
        if not is_value(e.rec):
            r = step(e.rec)
            return None if r is None else Ext(r, e.label, e.value)
        v = step(e.value)
        return None if v is None else Ext(e.rec, e.label, v)
    if isinstance(e, (Sel, Del)):
        if not is_value(e.rec):
            r = step(e.rec)
            return None if r is None else type(e)(r, e.label)
        return _reduce(e)
    return None


@dataclass(frozen=True)
class Value:
    value: object
    steps: int


@dataclass(frozen=True)
class Diverged:
    last: object
    steps: int


@dataclass(frozen=True)
class Stuck:
    term: object
    steps: int


def evaluate(e, fuel: int = 10_000):
    """Reduce ``e`` until it is a value, gets stuck, or ``fuel`` steps have been taken."""
    if fuel <= 0:
        raise ValueError("fuel must be positive")
    for n in range(fuel):
        if is_value(e):
            return Value(e, n)
        nxt = step(e)
        if nxt is None:
            return Stuck(e, n)
        e = nxt
    if is_value(e):
        return Value(e, fuel)
    return Diverged(e, fuel)


def show_expr(e) -> str:
    if isinstance(e, Const):
        if isinstance(e.value, bool):
            return "true" if e.value else "false"
        if isinstance(e.value, str):
            return f'"{e.value}"'
        return str(e.value)
    if isinstance(e, Name):
        return e.name
    if isinstance(e, EmptyRec):
        return "{}"
    if isinstance(e, Abs):
        from .frontend import show
        annot = " & ".join(f"({show(a)} -> {show(b)})" for a, b in e.annot)
        return f"(lam {e.param} : {annot} . {show_expr(e.body)})"
    if isinstance(e, App):
        return f"({show_expr(e.fun)} {show_expr(e.arg)})"
    if isinstance(e, Ext):
        return f"({show_expr(e.rec)} with {e.label} = {show_expr(e.value)})"
    if isinstance(e, Sel):
        return f"{show_expr(e.rec)}.{e.label}"
    if isinstance(e, Del):
        return f"{show_expr(e.rec)} \\ {e.label}"
    raise TypeError(f"not an expression: {e!r}")
