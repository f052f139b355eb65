"""Tallying: finding substitutions that make subtyping constraints hold.

The pipeline normalizes constraints into bounds on single variables, merges
and saturates the bounds, harmonizes the decompositions of row variables,
turns the result into equations and solves them.  Row variables are split
on demand into field variables ``ρ.ℓ`` and restricted rows ``ρ∖L``.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import Iterable, Optional

from .core import (
    FIELD, OPEN, TYPE, ContractivityError, FieldSummand, KindError, Node, ProjectionError,
    TypeSummand, Var, atom_field, dnf, field_type_part, summand_node, vars_of,
    world_of, CLOSED, _children,
)
from .subst import Substitution, apply, compose, freshen
from .subtype import empty_basic, empty_row, is_empty, is_subtype

LE = "<="
GE = ">="
BIG = 1 << 40
BLANK = "_"


class FuelExhausted(Exception):
    """The step budget ran out before the pipeline finished."""


class Fuel:
    def __init__(self, steps: int = 200_000):
        self.left = steps

    def tick(self, n: int = 1):
        self.left -= n
        if self.left < 0:
            raise FuelExhausted("tallying step budget exhausted")


@dataclass(frozen=True)
class Constraint:
    lhs: Node
    rel: str
    rhs: Node

    def __post_init__(self):
        if self.rel not in (LE, GE):
            raise ValueError(f"bad relation {self.rel}")
        a, b = self.lhs.kind, self.rhs.kind
        if a != b and {a.tag, b.tag} != {"type", "field"}:
            raise KindError(f"constraint relates kinds {a} and {b}")

    def oriented(self) -> tuple:
        return (self.lhs, self.rhs) if self.rel == LE else (self.rhs, self.lhs)

    def __repr__(self):
        return f"{self.lhs!r} {self.rel} {self.rhs!r}"


def ordered_vars(terms: Iterable[Node]) -> list:
    """Variables in order of first occurrence, depth first."""
    out, seen_v, seen_n = [], set(), set()
    for t in terms:
        stack = [t]
        while stack:
            x = stack.pop()
            if x.id in seen_n:
                continue
            seen_n.add(x.id)
            found = None
            if x.tag == "var":
                found = x.args[0]
            elif x.tag in ("rec", "row") and isinstance(x.tail, Var):
                found = x.tail
            if found is not None and found.root not in seen_v:
                seen_v.add(found.root)
                out.append(found.root)
            stack.extend(reversed(_children(x)))
    return out


class Ordering:
    """Injective ranks for variables and labels.

    Monomorphic variables rank above every other one.  Field projections of
    a row variable use even label ranks and restrictions use odd ones, so the
    two never collide.
    """

    def __init__(self, delta: Iterable[Var] = (), terms: Iterable[Node] = ()):
        self.delta = frozenset(v.root for v in delta)
        self.ranks: dict = {}
        self.label_ranks: dict = {}
        for v in ordered_vars(terms):
            self.rank(v)

    def rank(self, v: Var) -> int:
        v = v.root
        r = self.ranks.get(v)
        if r is None:
            r = len(self.ranks) + (BIG if v in self.delta else 0)
            self.ranks[v] = r
        return r

    def label_rank(self, l: str) -> int:
        r = self.label_ranks.get(l)
        if r is None:
            r = len(self.label_ranks)
            self.label_ranks[l] = r
        return r

    def key(self, v: Var) -> tuple:
        r = self.rank(v)
        if v.label is not None:
            return (r, 2 * self.label_rank(v.label) + 2)
        if v.cut is not None:
            code = sum(1 << self.label_rank(l) for l in sorted(v.cut))
            return (r, 2 * code + 1)
        return (r, 0)

    def mono(self, v: Var) -> bool:
        return v.root in self.delta


# -- sets of constraint-sets ------------------------------------------------

def prune(sets: list) -> list:
    """Drop duplicates and alternatives implied by weaker ones."""
    uniq = sorted(set(sets), key=lambda c: (len(c), sorted(_ckey(x) for x in c)))
    out = []
    for c in uniq:
        if not any(o <= c for o in out):
            out.append(c)
    return out


def _ckey(c) -> tuple:
    v, rel, t = c
    return (v.index, rel, t.id)


def meet(A: list, B: list) -> list:
    if not A or not B:
        return []
    return prune([a | b for a in A for b in B])


def join(A: list, B: list) -> list:
    return prune(list(A) + list(B))


TRIVIAL = [frozenset()]


# -- normalization ----------------------------------------------------------

class Normalizer:
    def __init__(self, store, order: Ordering, fuel: Fuel):
        self.s = store
        self.order = order
        self.fuel = fuel

    def constraints(self, cs: Iterable, sigma=frozenset()) -> list:
        out = TRIVIAL
        for c in cs:
            a, b = c.oriented() if isinstance(c, Constraint) else _orient(c)
            out = meet(out, self.leq(a, b, sigma))
            if not out:
                break
        return out

    def leq(self, a: Node, b: Node, sigma=frozenset()) -> list:
        s = a.store
        k = a.kind if a.kind == b.kind else FIELD
        return self.empty(s.and_(a, s.neg(b, k)), sigma)

    def _free(self, t: Node) -> bool:
        return any(not self.order.mono(v) for v in vars_of(t))

    def empty(self, t: Node, sigma=frozenset()) -> list:
        """Constraint-sets under which ``t`` is empty."""
        self.fuel.tick()
        if is_empty(t):
            return TRIVIAL
        if not self._free(t):
            return []
        if t.kind == TYPE:
            return self._all(dnf(t), self.type_summand, sigma)
        if t.kind == FIELD:
            return self._all(dnf(t), self.field_summand, sigma)
        return self._all(dnf(t), lambda sm, sg: self.row_summand(sm.P, sm.N, t.kind, sg), sigma)

    def _all(self, summands, fn, sigma) -> list:
        out = TRIVIAL
        for sm in summands:
            out = meet(out, fn(sm, sigma))
            if not out:
                break
        return out

    def _pick(self, vs) -> Optional[Var]:
        free = [v for v in vs if not self.order.mono(v)]
        return min(free, key=self.order.key) if free else None

    # type level
    def type_summand(self, sm: TypeSummand, sigma) -> list:
        s = self.s
        v = self._pick(sm.Vp | sm.Vn)
        if v is not None:
            rest = summand_node(s, TypeSummand(sm.P, sm.N, sm.Vp - {v}, sm.Vn - {v}))
            if v in sm.Vp:
                return [frozenset([(v, LE, s.neg(rest))])]
            return [frozenset([(v, GE, rest)])]
        w = sm.world
        if w is not None:
            return self.world(s, w, sm.P, frozenset(a for a in sm.N if world_of(a) == w), sigma)
        out = TRIVIAL
        for w in ("basic", "arrow", "record"):
            N = frozenset(a for a in sm.N if world_of(a) == w)
            out = meet(out, self.world(s, w, frozenset(), N, sigma))
        return out

    def world(self, s, w, P, N, sigma) -> list:
        if w == "basic":
            return TRIVIAL if empty_basic(P, N) else []
        if not P:
            P = frozenset([s.arrow(s.bot_type, s.any) if w == "arrow" else s.record((), OPEN)])
        node = s.inter(sorted(list(P) + [s.neg(a) for a in N], key=lambda n: n.id), TYPE)
        if node in sigma:
            return TRIVIAL
        if not self._free(node):
            return TRIVIAL if is_empty(node) else []
        sigma = sigma | {node}
        if w == "arrow":
            return self.arrows(s, sorted(P, key=lambda a: a.id), sorted(N, key=lambda a: a.id), sigma)
        rP = [s.row(a.fields, a.tail, ()) for a in sorted(P, key=lambda a: a.id)]
        rN = [s.row(a.fields, a.tail, ()) for a in sorted(N, key=lambda a: a.id)]
        return self.row_summand(frozenset(rP), frozenset(rN), rP[0].kind, sigma)

    def arrows(self, s, P, N, sigma) -> list:
        out = []
        for neg in N:
            dom, cod = neg.args
            acc = TRIVIAL
            for k in range(len(P) + 1):
                for sub in combinations(range(len(P)), k):
                    chosen = [P[i] for i in sub]
                    rest = [P[i] for i in range(len(P)) if i not in sub]
                    c1 = self.empty(s.and_(dom, s.neg(s.union((p.args[0] for p in chosen), TYPE))),
                                    sigma)
                    c2 = []
                    if rest:
                        c2 = self.empty(s.and_(s.inter((p.args[1] for p in rest), TYPE), s.neg(cod)),
                                        sigma)
                    acc = meet(acc, join(c1, c2))
                    if not acc:
                        break
                if not acc:
                    break
            out = join(out, acc)
            if TRIVIAL[0] in out:
                break
        return out

    # field level
    def field_summand(self, sm: FieldSummand, sigma) -> list:
        s = self.s
        v = self._pick(sm.Vp | sm.Vn)
        if v is not None:
            rest = summand_node(s, FieldSummand(sm.P, sm.N, sm.Vp - {v}, sm.Vn - {v}, sm.undef))
            if v in sm.Vp:
                return [frozenset([(v, LE, s.neg(rest, FIELD))])]
            return [frozenset([(v, GE, rest)])]
        if sm.undef is not False and not sm.P:
            return []
        return self.empty(field_type_part(s, sm), sigma)

    # row level
    def row_summand(self, P, N, kind, sigma) -> list:
        s = next(iter(P or N)).store
        if not P:
            P = frozenset([s.top(kind)])
        atoms = list(P) + list(N)
        rho = self._pick({a.tail for a in atoms if isinstance(a.tail, Var)})
        if rho is None:
            return self.tail_mono(s, _sorted(P), _sorted(N), sigma)
        L = next(a.labels for a in atoms if a.tail is rho)
        if not L:
            return [self.single_row(s, P, N, rho)]
        return self.split_row(s, _sorted(P), _sorted(N), rho, L, kind, sigma)

    def single_row(self, s, P, N, rho) -> frozenset:
        r0 = s.var(rho)
        k = r0.kind
        if r0 in P:
            rest = s.inter([a for a in _sorted(P) if a is not r0] + [s.neg(a) for a in _sorted(N)], k)
            return frozenset([(rho, LE, s.neg(rest))])
        rest = s.inter(_sorted(P) + [s.neg(a) for a in _sorted(N) if a is not r0], k)
        return frozenset([(rho, GE, rest)])

    def _field_problem(self, s, pos: list, negs: list, sigma, cache: dict, key) -> list:
        hit = cache.get(key)
        if hit is None:
            t = s.and_(s.inter(pos, FIELD), s.neg(s.union(negs, FIELD), FIELD))
            hit = self.empty(t, sigma)
            cache[key] = hit
        return hit

    def split_row(self, s, P, N, rho, L, kind, sigma) -> list:
        order = self.order
        labels = sorted(L)
        Lset = frozenset(L)

        def at(r, l):
            tl = r.tail
            if isinstance(tl, Var) and not order.mono(tl) and l not in r.labels:
                return s.var(s.proj_var(tl, l))
            return atom_field(r, l)

        def cutp(r):
            fs = [(l, f) for l, f in r.fields if l not in Lset]
            tl = r.tail
            if isinstance(tl, Var):
                inside = Lset - tl.kind.excluded
                if inside:
                    tl = OPEN if order.mono(tl) else s.cut_var(tl, inside)
            return s.row(fs, tl, r.args[2] | Lset)

        def mono_covering(r):
            return isinstance(r.tail, Var) and order.mono(r.tail) and bool(Lset - r.tail.kind.excluded)

        def shape(r):
            return s.row([(l, s.field_top) for l in sorted(r.labels)], r.tail, r.args[2])

        pd = [shape(r) for r in P if mono_covering(r)]
        nd = [r for r in N if mono_covering(r)]
        cP = [cutp(r) for r in P]
        ck = cP[0].kind
        pos_fields = {l: [at(r, l) for r in P] for l in labels}
        fcache, tcache = {}, {}
        out = TRIVIAL
        for choice in product(labels + [BLANK], repeat=len(N)):
            self.fuel.tick()
            fields = []
            for l in labels:
                negs = [N[i] for i, c in enumerate(choice) if c == l]
                key = (l, tuple(a.id for a in negs))
                fields = join(fields, self._field_problem(
                    s, pos_fields[l], [at(r, l) for r in negs], sigma, fcache, key))
                if TRIVIAL[0] in fields:
                    break
            if TRIVIAL[0] not in fields:
                blanks = [N[i] for i, c in enumerate(choice) if c == BLANK]
                tails = TRIVIAL
                cand = [r for r in blanks if r in nd]
                for k in range(len(cand) + 1):
                    for sub in combinations(cand, k):
                        probe = s.and_(s.inter(pd, kind), s.neg(s.union((shape(r) for r in sub), kind)))
                        if empty_row(probe):
                            continue
                        negs = [r for r in blanks if r not in sub]
                        key = tuple(a.id for a in negs)
                        hit = tcache.get(key)
                        if hit is None:
                            t = s.and_(s.inter(cP, ck), s.neg(s.union((cutp(r) for r in negs), ck)))
                            hit = self.empty(t, sigma)
                            tcache[key] = hit
                        tails = meet(tails, hit)
                        if not tails:
                            break
                    if not tails:
                        break
                fields = join(fields, tails)
            out = meet(out, fields)
            if not out:
                break
        return out

    def tail_mono(self, s, P, N, sigma) -> list:
        labels = sorted(set().union(*(a.labels for a in P + N)))
        pvar_tails = {r.tail for r in P if isinstance(r.tail, Var)}
        closed_pos = any(r.tail == CLOSED for r in P)
        pos_fields = {l: [atom_field(r, l) for r in P] for l in labels}
        cache = {}
        out = TRIVIAL
        for choice in product(labels + [BLANK], repeat=len(N)):
            self.fuel.tick()
            blanks = [N[i] for i, c in enumerate(choice) if c == BLANK]
            covered = False
            for r in blanks:
                if isinstance(r.tail, Var):
                    if r.tail in pvar_tails:
                        covered = True
                elif r.tail == OPEN or closed_pos:
                    covered = True
            if covered:
                continue
            alt = []
            for l in labels:
                negs = [N[i] for i, c in enumerate(choice) if c == l]
                key = (l, tuple(a.id for a in negs))
                alt = join(alt, self._field_problem(
                    s, pos_fields[l], [atom_field(r, l) for r in negs], sigma, cache, key))
                if TRIVIAL[0] in alt:
                    break
            out = meet(out, alt)
            if not out:
                break
        return out


def _sorted(atoms) -> list:
    return sorted(atoms, key=lambda a: a.id)


def _orient(c) -> tuple:
    a, rel, b = c
    if isinstance(a, Var):
        a = b.store.var(a)
    return (a, b) if rel == LE else (b, a)


# -- merging, saturation, harmonization --------------------------------------

def bounds_of(C) -> dict:
    out = {}
    for v, rel, t in C:
        lo, hi = out.get(v, (None, None))
        if rel == GE:
            lo = t
        else:
            hi = t
        out[v] = (lo, hi)
    return out


def merge(C: frozenset) -> frozenset:
    """One lower and one upper bound per variable."""
    lows, highs = {}, {}
    for v, rel, t in C:
        (lows if rel == GE else highs).setdefault(v, []).append(t)
    out = set()
    for v, ts in lows.items():
        s = ts[0].store
        out.add((v, GE, s.union(_sorted(ts), v.kind)))
    for v, ts in highs.items():
        s = ts[0].store
        out.add((v, LE, s.inter(_sorted(ts), v.kind)))
    return frozenset(out)


class Pipeline:
    def __init__(self, store, order: Ordering, fuel: Fuel):
        self.order = order
        self.fuel = fuel
        self.norm = Normalizer(store, order, fuel)

    def saturate(self, C: frozenset, done=frozenset()) -> list:
        self.fuel.tick()
        b = bounds_of(C)
        for v in sorted(b, key=self.order.key):
            lo, hi = b[v]
            if lo is None or hi is None or (lo.id, hi.id) in done:
                continue
            extra = self.norm.leq(lo, hi)
            out = []
            for c2 in meet([C], extra):
                out.extend(self.saturate(merge(c2), done | {(lo.id, hi.id)}))
            return prune(out)
        return [C]

    def harmonize(self, C: frozenset, seen=frozenset()) -> list:
        self.fuel.tick()
        L0 = decomposition_labels(C)
        for c in sorted(C, key=lambda c: (self.order.key(c[0]), c[1])):
            w, rel, r = c
            if not w.is_row:
                continue
            base = w.root
            want = L0.get(base)
            have = w.cut or frozenset()
            if not want or want <= have:
                continue
            s = r.store
            row = s.row([(l, s.var(s.proj_var(base, l))) for l in sorted(want - have)],
                        s.cut_var(base, want), w.kind.excluded)
            extra = self.norm.leq(row, r) if rel == LE else self.norm.leq(r, row)
            out = []
            for cn in meet([C - {c}], extra):
                for cm in self.saturate(merge(cn)):
                    if cm in seen:
                        continue
                    out.extend(self.harmonize(cm, seen | {cm}))
            return prune(out)
        return [C]

    def equations(self, C: frozenset) -> tuple:
        """Equation system for a harmonized set, plus the row reassembly map."""
        bnd = bounds_of(C)
        L0 = decomposition_labels(C)
        if not C:
            return {}, {}
        s = self.norm.s
        rebuild = {}
        unknowns = set(bnd)
        for base, labels in L0.items():
            if self.order.mono(base):
                continue
            fs = [(l, s.var(s.proj_var(base, l))) for l in sorted(labels)]
            rebuild[base] = s.row(fs, s.cut_var(base, labels), base.kind.excluded)
            unknowns.update(s.proj_var(base, l) for l in labels)
            unknowns.add(s.cut_var(base, labels))
        tau = Substitution(dict(rebuild))
        eqs = {}
        for v in sorted(unknowns, key=self.order.key):
            lo, hi = bnd.get(v, (None, None))
            lo = lo if lo is not None else s.bot(v.kind)
            hi = hi if hi is not None else s.top(v.kind)
            w = s.fresh(v.kind, v.root.name)
            self.order.rank(w)
            eqs[v] = apply(tau, s.and_(s.or_(lo, s.var(w)), hi))
        return eqs, rebuild

    def unify(self, eqs: dict) -> dict:
        sol = {}
        pending = dict(eqs)
        chain = []
        while pending:
            self.fuel.tick()
            v = min(pending, key=self.order.key)
            T = pending.pop(v)
            if v in vars_of(T):
                s = T.store
                ph = s.placeholder(v.kind)
                T = s.bind(ph, apply(Substitution({v: ph}), T))
            one = Substitution({v: T})
            pending = {w: apply(one, t) for w, t in pending.items()}
            chain.append((v, T))
        for v, T in reversed(chain):
            sol[v] = apply(Substitution(dict(sol)), T) if sol else T
        return sol

    def solve(self, C: frozenset, originals: Iterable[Var]) -> Substitution:
        eqs, rebuild = self.equations(C)
        sol = self.unify(eqs)
        sub = Substitution(dict(sol)) if sol else Substitution()
        out = {}
        for v in originals:
            if v in rebuild:
                out[v] = apply(sub, rebuild[v])
            elif v in sol:
                out[v] = sol[v]
        return Substitution(out)


def decomposition_labels(C) -> dict:
    """For each base row variable, the labels it is decomposed over in ``C``."""
    acc = {}
    for v, _, t in C:
        for w in [v, *vars_of(t)]:
            if w.label is not None:
                acc.setdefault(w.base, set()).add(w.label)
            elif w.cut is not None:
                acc.setdefault(w.base, set()).update(w.cut)
    return {k: frozenset(ls) for k, ls in acc.items()}


def _as_constraints(cs) -> list:
    out = []
    for c in cs:
        if isinstance(c, Constraint):
            out.append(c)
        else:
            a, rel, b = c
            out.append(Constraint(a, rel, b))
    return out


def tally(constraints, delta: Iterable[Var] = (), fuel: Optional[Fuel] = None,
          order: Optional[Ordering] = None, keep_empty: bool = False) -> list:
    """Substitutions solving ``constraints`` without touching ``delta``.

    An empty result means no solution was found; tallying is sound but not
    complete, so this is not a proof that none exists.  Unless
    ``keep_empty`` is set, solutions binding a variable to an empty term
    are discarded: they satisfy constraints only vacuously.
    """
    cs = _as_constraints(constraints)
    if not cs:
        return [Substitution()]
    fuel = fuel or Fuel()
    terms = [x for c in cs for x in (c.lhs, c.rhs)]
    order = order or Ordering(delta, terms)
    pipe = Pipeline(terms[0].store, order, fuel)
    originals = [v for v in ordered_vars(terms) if not order.mono(v)]
    merged = prune([merge(c) for c in pipe.norm.constraints(cs)])
    saturated = prune([c2 for c1 in merged for c2 in pipe.saturate(c1)])
    harmonized = prune([c3 for c2 in saturated for c3 in pipe.harmonize(c2, frozenset([c2]))])
    out, seen = [], set()
    for c in harmonized:
        try:
            sigma = pipe.solve(c, originals)
        except (ProjectionError, ContractivityError, KindError):
            continue
        if not keep_empty and degenerate(sigma):
            continue
        key = tuple(sorted((v.index, t.id) for v, t in sigma.items()))
        if key not in seen:
            seen.add(key)
            out.append(sigma)
    return out


def degenerate(sigma: Substitution) -> bool:
    """Whether ``sigma`` instantiates some variable to an empty term."""
    return any(is_empty(t) for _, t in sigma.items())


def verify(sigma: Substitution, constraints) -> bool:
    """Whether ``sigma`` solves every constraint."""
    for c in _as_constraints(constraints):
        a, b = c.oriented()
        if not is_subtype(apply(sigma, a), apply(sigma, b)):
            return False
    return True


# -- instantiation searches ---------------------------------------------------

def _roots(t: Node) -> set:
    return {v.root for v in vars_of(t)}


def leq_sub(t1: Node, t2: Node, delta: Iterable[Var] = (), max_card: int = 2,
            fuel: Optional[Fuel] = None) -> Optional[list]:
    """Substitutions σ1..σn (n ≤ max_card) with the meet of t1σi below t2."""
    s = t1.store
    delta = {v.root for v in delta}
    fixed = delta | _roots(t2)
    for n in range(1, max_card + 1):
        copies, rens = [], []
        for _ in range(n):
            c, ren = freshen(s, t1, delta)
            copies.append(c)
            rens.append(ren)
        lhs = s.inter(copies, t1.kind)
        for theta in tally([Constraint(lhs, LE, t2)], fixed, fuel=fuel):
            insts = [compose(theta, ren, s).restrict(_roots(t1) - delta) for ren in rens]
            if is_subtype(s.inter((apply(i, t1) for i in insts), t1.kind), t2):
                return insts
    return None


def domain(t: Node) -> Node:
    """The domain of a type below the top arrow: meet over summands of the union of domains."""
    s = t.store
    out = s.any
    for sm in _arrow_summands(t):
        out = s.and_(out, s.union((a.args[0] for a in _sorted(sm.P)), TYPE))
    return out


def _arrow_summands(t: Node) -> list:
    s = t.store
    out = []
    for sm in dnf(t):
        if sm.world != "arrow":
            continue
        if is_empty(summand_node(s, sm)):
            continue
        out.append(sm)
    return out


def apply_result(t: Node, arg: Node) -> Node:
    """The least type of applying a function of type ``t`` to an argument of type ``arg``."""
    s = t.store
    out = s.bot_type
    for sm in _arrow_summands(t):
        P = _sorted(sm.P)
        for k in range(len(P)):
            for sub in combinations(range(len(P)), k):
                if is_subtype(arg, s.union((P[i].args[0] for i in sub), TYPE)):
                    continue
                cod = s.inter((P[i].args[1] for i in range(len(P)) if i not in sub), TYPE)
                out = s.or_(out, cod)
    return out


def apply_types(t1: Node, t2: Node, delta: Iterable[Var] = (), budget: int = 4,
                fuel: Optional[Fuel] = None) -> list:
    """Result types of applying instances of ``t1`` to instances of ``t2``.

    Cardinalities of the two instance sets are explored in dove-tail order;
    the results of the first successful pair are returned.
    """
    s = t1.store
    delta = {v.root for v in delta}
    top_arrow = s.arrow(s.bot_type, s.any)
    for total in range(2, budget + 1):
        for nj in range(1, total):
            ni = total - nj
            fs = s.inter([freshen(s, t1, delta)[0] for _ in range(nj)], TYPE)
            xs = s.inter([freshen(s, t2, delta)[0] for _ in range(ni)], TYPE)
            gamma = s.var(s.fresh(TYPE, "res"))
            found = []
            for theta in tally([Constraint(fs, LE, s.arrow(xs, gamma))], delta, fuel=fuel):
                f = apply(theta, fs)
                x = apply(theta, xs)
                if not is_subtype(f, top_arrow) or not is_subtype(x, domain(f)):
                    continue
                r = _tightest(f, x, delta)
                if r not in found:
                    found.append(r)
            if found:
                return found
    return []


def _tightest(f: Node, x: Node, delta: set) -> Node:
    """Application result, after sending leftover polymorphic variables to bottom when allowed."""
    s = f.store
    r = apply_result(f, x)
    rest = (_roots(f) | _roots(x)) - delta
    if not rest:
        return r
    low = Substitution({v: s.bot(v.kind) for v in rest})
    f2, x2 = apply(low, f), apply(low, x)
    if not is_subtype(x2, domain(f2)):
        return r
    r2 = apply_result(f2, x2)
    if is_empty(r2) and not is_empty(r):
        return r
    return r2
