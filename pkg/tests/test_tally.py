import pytest
from genutil import constraint_set, fresh_gen
from hypothesis import given, settings
from hypothesis import strategies as st

from rowtypes.frontend import parse_type
from rowtypes.subst import Substitution, apply
from rowtypes.subtype import is_empty, is_equiv, is_subtype
from rowtypes.tally import (
    GE, LE, Constraint, Fuel, FuelExhausted, Ordering, Pipeline, apply_types,
    decomposition_labels, leq_sub, merge, prune, tally, verify,
)


def T(s, text):
    return parse_type(s, text)


def pipeline(s, terms, delta=()):
    return Pipeline(s, Ordering(delta, terms), Fuel())


def test_normalization_splits_record_constraint_in_three(s):
    a, b = T(s, "{l1: 'a, l2: 'b | ..}"), T(s, "{l1: int, l2: bool | ..}")
    pipe = pipeline(s, [a, b])
    alts = prune([merge(c) for c in pipe.norm.constraints([Constraint(a, LE, b)])])
    x, y = s.lookup_var("a", "type"), s.lookup_var("b", "type")
    shapes = set()
    for c in alts:
        shapes.add(frozenset((v, rel, "none" if is_empty(t) else repr(t)) for v, rel, t in c))
    assert len(alts) == 3
    assert frozenset({(x, LE, "none")}) in shapes
    assert frozenset({(y, LE, "none")}) in shapes
    mixed = next(c for c in alts if len(c) == 2)
    bounds = {v: t for v, _, t in mixed}
    assert is_equiv(bounds[x], s.basic("int")) and is_equiv(bounds[y], s.basic("bool"))


def test_normalizing_nothing(s):
    assert pipeline(s, []).norm.constraints([]) == [frozenset()]


def test_merge_joins_lower_and_meets_upper_bounds(s):
    x = s.tvar("x")
    lo = merge(frozenset({(x, GE, s.basic("int")), (x, GE, s.basic("bool"))}))
    (_, rel, t), = lo
    assert rel == GE and is_equiv(t, T(s, "int | bool"))
    hi = merge(frozenset({(x, LE, s.basic("int")), (x, LE, s.any)}))
    (_, rel, t), = hi
    assert rel == LE and t is s.basic("int")


def test_saturation(s):
    x = s.tvar("x")
    pipe = pipeline(s, [s.var(x)])
    assert pipe.saturate(frozenset({(x, GE, s.basic("int")), (x, LE, s.basic("bool"))})) == []
    ok = frozenset({(x, GE, s.basic("int")), (x, LE, T(s, "int | str"))})
    assert pipe.saturate(ok) == [ok]
    lone = frozenset({(x, LE, s.basic("int"))})
    assert pipe.saturate(lone) == [lone]


def test_harmonization_uses_one_label_set(s):
    r = s.rvar("r", ())
    pa = s.var(s.proj_var(r, "a"))
    cb = s.cut_var(r, ["b"])
    C = frozenset({(s.proj_var(r, "a"), LE, s.basic("int")),
                   (cb, LE, s.row([("a", s.basic("int"))], "closed", ["b"]))})
    pipe = pipeline(s, [pa])
    out = pipe.harmonize(C, frozenset([C]))
    assert out
    for c in out:
        labels = decomposition_labels(c)[r]
        assert all(v.cut == labels for v, _, _ in c if v.cut is not None)
    assert any(decomposition_labels(c)[r] == frozenset({"a", "b"}) for c in out)
    done = frozenset({(s.tvar("y"), LE, s.basic("int"))})
    assert pipe.harmonize(done) == [done]


def test_unify_builds_recursive_solution(s):
    x = s.tvar("x")
    pipe = pipeline(s, [s.var(x)])
    sol = pipe.unify({x: s.arrow(s.basic("int"), s.var(x))})
    t = sol[x]
    assert is_equiv(t, s.arrow(s.basic("int"), t))
    assert pipe.unify({}) == {}
    assert pipe.unify({x: s.basic("int")}) == {x: s.basic("int")}


def test_upper_bound_gives_fresh_meet(s):
    sols = tally([(T(s, "'a"), LE, s.basic("int"))])
    assert len(sols) == 1
    (v, t), = sols[0].items()
    assert is_subtype(t, s.basic("int"))
    assert not is_equiv(t, s.basic("int"))  # still polymorphic


def test_record_example_solutions_verify(s):
    c = Constraint(T(s, "{l1: 'a, l2: 'b | ..}"), LE, T(s, "{l1: int, l2: bool | ..}"))
    sols = tally([c])
    assert sols and all(verify(sigma, [c]) for sigma in sols)
    assert len(tally([c], keep_empty=True)) >= len(sols)


def test_unsatisfiable_bounds(s):
    assert tally([(s.basic("int"), LE, T(s, "'a")), (T(s, "'a"), LE, s.basic("bool"))]) == []


def test_satisfiable_bounds(s):
    cs = [(s.basic("int"), LE, T(s, "'a")), (T(s, "'a"), LE, T(s, "int | str"))]
    sols = tally(cs)
    assert sols and all(verify(sigma, cs) for sigma in sols)


def test_empty_constraint_set(s):
    assert tally([]) == [Substitution()]


def test_monomorphic_variables_are_not_instantiated(s):
    a = T(s, "'a")
    sols = tally([(a, LE, s.basic("int"))], delta=[s.lookup_var("a", "type")])
    assert sols == []
    assert tally([(a, LE, a)], delta=[s.lookup_var("a", "type")]) == [Substitution()]


def test_recursive_constraint(s):
    cs = [(T(s, "'a"), GE, s.arrow(s.basic("int"), T(s, "'a")))]
    sols = tally(cs)
    assert sols and all(verify(sigma, cs) for sigma in sols)


def test_row_constraints(s):
    cs = [(T(s, "{a: int | @r}"), LE, T(s, "{a: int, b: bool | ..}"))]
    sols = tally(cs)
    assert sols and all(verify(sigma, cs) for sigma in sols)
    cs = [(T(s, "{a: int, b: bool}"), LE, T(s, "{a: int | @q}"))]
    sols = tally(cs)
    assert sols and all(verify(sigma, cs) for sigma in sols)


def test_componentwise_unsound_example(s):
    c = Constraint(T(s, "{val: any | undef | @rho}"), LE,
                   T(s, "{log: str, succ: true, val: any} | {log: str, succ: false}"))
    assert tally([c]) == []


def test_fuel_runs_out(s):
    c = Constraint(T(s, "{l1: 'a, l2: 'b | ..}"), LE, T(s, "{l1: int, l2: bool | ..}"))
    with pytest.raises(FuelExhausted):
        tally([c], fuel=Fuel(2))


def test_verify_rejects_wrong_solution(s):
    a = T(s, "'a")
    sigma = Substitution({s.lookup_var("a", "type"): s.basic("str")})
    assert not verify(sigma, [(a, LE, s.basic("int"))])


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 10**6))
def test_tallying_is_sound(seed):
    g = fresh_gen(seed)
    cs = constraint_set(g, 4)
    for sigma in tally(cs):
        assert verify(sigma, cs)


# -- instantiation searches -----------------------------------------------------

def test_leq_sub_identity(s):
    assert leq_sub(s.basic("int"), s.basic("int")) == [Substitution()]


def test_leq_sub_instantiates_to_record(s):
    target = T(s, "{l: int | ..}")
    a = T(s, "'a")
    sols = leq_sub(a, target)
    assert sols is not None
    assert is_subtype(s.inter((apply(x, a) for x in sols), a.kind), target)


def test_leq_sub_fails(s):
    assert leq_sub(s.basic("int"), s.basic("bool")) is None


def test_leq_sub_needs_two_instances(s):
    t1 = T(s, "'c -> 'c")
    t2 = T(s, "(int -> int) & (bool -> bool)")
    assert leq_sub(t1, t2, max_card=1) is None
    sols = leq_sub(t1, t2, max_card=2)
    assert sols is not None and len(sols) == 2
    assert is_subtype(s.inter((apply(x, t1) for x in sols), t1.kind), t2)


def test_apply_types_monomorphic(s):
    assert apply_types(T(s, "int -> bool"), s.basic("int")) == [T(s, "bool")]
    assert apply_types(T(s, "int -> int"), s.basic("bool")) == []


def test_apply_types_polymorphic_identity(s):
    found = apply_types(T(s, "'a -> 'a"), s.basic("int"))
    assert found
    assert all(is_subtype(s.basic("int"), t) for t in found)
    assert all(is_subtype(t, s.basic("int")) for t in found)


def test_apply_types_row_polymorphic(s):
    f = T(s, "{domain: any | undef | @f} -> {domain: str | @f}")
    x = T(s, "{file: str, line: int}")
    found = apply_types(f, x)
    assert found
    want = T(s, "{domain: str, file: str, line: int}")
    assert any(is_equiv(t, want) for t in found)
