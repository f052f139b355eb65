import pytest
from genutil import fresh_gen
from hypothesis import given, settings
from hypothesis import strategies as st

from rowtypes.core import OPEN
from rowtypes.frontend import parse_type
from rowtypes.subst import IDENTITY, Substitution, apply, compose, freshen, term_vars
from rowtypes.subtype import is_equiv, is_subtype


def test_kinds_are_checked(s):
    a = s.tvar("a")
    r = s.rvar("r", ("x",))
    with pytest.raises(TypeError):
        Substitution({a: s.row([], OPEN, ["x"])})
    with pytest.raises(TypeError):
        Substitution({r: s.basic("int")})
    with pytest.raises(TypeError):
        Substitution({r: s.row([], OPEN, [])})
    f = s.fvar("f")
    assert Substitution({f: s.basic("int")})[f] is s.basic("int")


def test_identity_bindings_are_dropped(s):
    a = s.tvar("a")
    r = s.rvar("r")
    assert len(Substitution({a: s.var(a), r: s.var(r)})) == 0


def test_apply(s):
    t = parse_type(s, "'a -> {l: 'a | @r}")
    a = s.lookup_var("a", "type")
    r = s.lookup_var("r", "row")
    sigma = Substitution({a: s.basic("int"), r: s.row([("m", s.basic("str"))], "closed", ["l"])})
    assert is_equiv(apply(sigma, t), parse_type(s, "int -> {l: int, m: str}"))
    assert apply(IDENTITY, t) is t


def test_derived_variables_follow_their_base(s):
    r = s.rvar("r", ())
    sigma = Substitution({r: s.row([("a", s.basic("int"))], OPEN, [])})
    pa = s.var(s.proj_var(r, "a"))
    assert apply(sigma, pa) is s.basic("int")
    rest = s.var(s.cut_var(r, ["a"]))
    assert apply(sigma, rest) is s.row([], OPEN, ["a"])


def test_compose_on_example(s):
    a, b = s.tvar("a"), s.tvar("b")
    s1 = Substitution({a: s.arrow(s.var(b), s.var(b))})
    s2 = Substitution({b: s.basic("int")})
    both = compose(s2, s1, s)
    assert both[a] is s.arrow(s.basic("int"), s.basic("int"))
    assert both[b] is s.basic("int")


def test_freshen(s):
    t = parse_type(s, "'a -> 'a")
    t1, ren1 = freshen(s, t)
    t2, _ = freshen(s, t)
    (v1,) = term_vars(t1)
    (v2,) = term_vars(t2)
    assert v1 != v2 and v1 != s.lookup_var("a", "type")
    assert t1 is s.arrow(s.var(v1), s.var(v1))
    kept, _ = freshen(s, t, avoid=[s.lookup_var("a", "type")])
    assert kept is t


def test_recursive_types_survive_substitution(s):
    t = parse_type(s, "rec X. {hd: 'a, tl: X | undef}")
    sigma = Substitution({s.lookup_var("a", "type"): s.basic("int")})
    u = apply(sigma, t)
    assert is_equiv(u, parse_type(s, "rec Y. {hd: int, tl: Y | undef}"))


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6))
def test_substitution_preserves_subtyping(seed):
    g = fresh_gen(seed)
    s = g.s
    a, b = g.type(2), g.type(2)
    if not is_subtype(a, b):
        a = s.and_(a, b)
    sigma = g.substitution()
    assert is_subtype(apply(sigma, a), apply(sigma, b))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_composition_law(seed):
    g = fresh_gen(seed)
    t = g.type(3)
    s1, s2 = g.substitution(), g.substitution()
    assert is_equiv(apply(compose(s2, s1, g.s), t), apply(s2, apply(s1, t)))
