"""Seeded random generators shared by the property and acceptance tests."""
import random

from rowtypes.core import CLOSED, OPEN, Store
from rowtypes.subst import Substitution, apply
from rowtypes.subtype import is_empty
from rowtypes.typing import Abs, App, Const, Del, EmptyRec, Ext, Name, Sel

LABELS = ("a", "b", "c")
BASIC = ("int", "str", "true", "false", "bool")


class TypeGen:
    """Random types over a few type and row variables living in one store."""

    def __init__(self, store: Store, rng: random.Random, tvars=("x", "y"), rvars=(("r", "a"), ("q", ""))):
        self.s = store
        self.rng = rng
        self.tvars = [store.tvar(n) for n in tvars]
        self.rvars = [store.rvar(n, tuple(ls)) for n, ls in rvars]

    def leaf(self):
        s, rng = self.s, self.rng
        k = rng.random()
        if self.tvars and k < 0.2:
            return s.var(rng.choice(self.tvars))
        if k < 0.3:
            return rng.choice((s.any, s.bot_type))
        return s.basic(rng.choice(BASIC))

    def type(self, depth=2):
        s, rng = self.s, self.rng
        if depth <= 0 or rng.random() < 0.1 + 0.1 * (depth < 2):
            return self.leaf()
        op = rng.choice(("or", "and", "not", "arrow", "rec", "rec"))
        if op == "not":
            return s.neg(self.type(depth - 1))
        if op == "arrow":
            return s.arrow(self.type(depth - 1), self.type(depth - 1))
        if op == "rec":
            return self.record(depth - 1)
        a, b = self.type(depth - 1), self.type(depth - 1)
        return s.or_(a, b) if op == "or" else s.and_(a, b)

    def field(self, depth):
        s, rng = self.s, self.rng
        k = rng.random()
        if k < 0.15:
            return s.undef
        t = self.type(depth)
        return s.or_(t, s.undef) if k < 0.35 else t

    def record(self, depth=1):
        s, rng = self.s, self.rng
        k = rng.random()
        if self.rvars and k < 0.35:
            rho = rng.choice(self.rvars)
            labels = sorted(rho.kind.excluded)
            return s.record([(l, self.field(depth)) for l in labels], rho)
        labels = [l for l in LABELS if rng.random() < 0.5]
        tail = CLOSED if k < 0.7 else OPEN
        return s.record([(l, self.field(depth)) for l in labels], tail)

    def record_combo(self, depth=2):
        """A Boolean combination of record atoms (always below the open record)."""
        s, r = self.s, self.rng.random()
        if depth == 0 or r < 0.4:
            return self.record(1)
        a, b = self.record_combo(depth - 1), self.record_combo(depth - 1)
        if r < 0.6:
            return s.or_(a, b)
        if r < 0.8:
            return s.and_(a, b)
        return s.and_(a, s.neg(b))

    def nonempty(self, make, tries=50):
        """Draw from ``make`` until a nonempty term comes out."""
        for _ in range(tries):
            t = make()
            if not is_empty(t):
                return t
        return t

    def row_for(self, rho, depth=1):
        """A random closed or open row over the definition space of ``rho``."""
        s, rng = self.s, self.rng
        excl = rho.kind.excluded
        labels = [l for l in LABELS if l not in excl and rng.random() < 0.5]
        tail = CLOSED if rng.random() < 0.5 else OPEN
        r = s.row([(l, self.field(depth)) for l in labels], tail, excl)
        if rng.random() < 0.3:
            other = [l for l in LABELS if l not in excl and rng.random() < 0.5]
            r2 = s.row([(l, self.field(depth)) for l in other], OPEN, excl)
            r = s.or_(r, r2)
        return r

    def substitution(self, depth=1) -> Substitution:
        b = {}
        for v in self.tvars:
            if self.rng.random() < 0.7:
                b[v] = self.type(depth)
        for rho in self.rvars:
            if self.rng.random() < 0.7:
                b[rho] = self.row_for(rho, depth)
        return Substitution(b)


def fresh_gen(seed: int, **kw) -> TypeGen:
    return TypeGen(Store(), random.Random(seed), **kw)


# -- constraint sets ----------------------------------------------------------

def constraint_set(g: TypeGen, size: int):
    """Up to ``size`` constraints mixing types, fields (as record fields) and rows (as records).

    About half of the constraints are planted: ``t <= tσ | u`` for a random σ,
    so that many sets have solutions.
    """
    rng = g.rng
    out = []
    for _ in range(rng.randint(1, size)):
        k = rng.random()
        if k < 0.5:
            a = g.record(1) if rng.random() < 0.5 else g.type(2)
            sigma = g.substitution()
            b = g.s.or_(apply(sigma, a), g.type(1)) if rng.random() < 0.5 else apply(sigma, a)
            out.append((a, "<=", b) if rng.random() < 0.5 else (b, ">=", a))
            continue
        if k < 0.7:
            a, b = g.type(2), g.type(2)
        elif k < 0.9:
            a, b = g.record(1), g.record(1)
        else:
            a, b = g.s.arrow(g.record(1), g.type(1)), g.type(2)
        out.append((a, rng.choice(("<=", ">=")), b))
    return out


# -- well-typed programs --------------------------------------------------------

class ProgGen:
    """Random closed programs, mostly well typed, built by a type-directed walk."""

    def __init__(self, store: Store, rng: random.Random):
        self.s = store
        self.rng = rng
        self.n = 0

    def fresh(self):
        self.n += 1
        return f"v{self.n}"

    def base(self):
        k = self.rng.choice(("int", "str", "true", "false"))
        return {"int": lambda: Const(self.rng.randint(-3, 9)), "str": lambda: Const("s"),
                "true": lambda: Const(True), "false": lambda: Const(False)}[k]()

    def value_of(self, kind, env, depth):
        """An expression intended to have a type of the given shape."""
        rng, s = self.rng, self.s
        names = [x for x, k in env if k == kind]
        if names and rng.random() < 0.4:
            return Name(rng.choice(names))
        if depth <= 0:
            return self.base() if kind == "base" else EmptyRec()
        if kind == "base":
            k = rng.random()
            if k < 0.35:
                return self.base()
            if k < 0.6:
                lab = rng.choice(LABELS)
                rec = Ext(self.value_of("rec", env, depth - 1), lab, self.value_of("base", env, depth - 1))
                return Sel(rec, lab)
            # an identity-like function applied to something
            x = self.fresh()
            body = self.value_of("base", env + [(x, "base")], depth - 1)
            return App(Abs(((s.any, s.any),), x, body), self.value_of("base", env, depth - 1))
        k = rng.random()
        if k < 0.3:
            return EmptyRec()
        rec = self.value_of("rec", env, depth - 1)
        lab = rng.choice(LABELS)
        if k < 0.55:
            return Del(rec, lab)
        return Ext(Del(rec, lab), lab, self.value_of("base", env, depth - 1))

    def program(self, depth=3):
        rng, s = self.rng, self.s
        k = rng.random()
        if k < 0.25:
            # a row-polymorphic function applied to a record
            rho = s.rvar(f"p{self.fresh()}", ("a",))
            dom = s.record([("a", s.or_(s.any, s.undef))], rho)
            cod = s.record([("a", s.basic("int"))], rho)
            x = self.fresh()
            f = Abs(((dom, cod),), x, Ext(Del(Name(x), "a"), "a", Const(1)))
            return App(f, self.value_of("rec", [], depth))
        if k < 0.4:
            x = self.fresh()
            return Abs(((s.basic("int"), s.basic("int")),), x, Name(x))
        return self.value_of(rng.choice(("base", "rec")), [], depth)
