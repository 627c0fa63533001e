from hypothesis import given, settings
from hypothesis import strategies as st

from cohforce.equality import classify
from cohforce.parser import parse_equation
from cohforce.syntax import App, Signature, Var
from cohforce.unify import Failure, Unifier, mgu

from oracles import instance_of, solutions
from strategies import terms

SIG = Signature((("a", 0), ("f", 1), ("g", 2)), (("P", 1),))
FUNS = SIG.functions


def eqs(text):
    return parse_equation(text)


def test_simple_bindings():
    u = mgu(eqs("f(x) = f(y)"))
    assert isinstance(u, Unifier)
    assert str(u) == "[x:=y]"


def test_decomposition_and_propagation():
    u = mgu(eqs("g(x, f(y)) = g(f(z), x)"))
    assert u.unifies(eqs("g(x, f(y)) = g(f(z), x)"))
    assert u.apply(Var("y")) == Var("z")
    assert u.is_idempotent()


def test_clash_and_occurs_check():
    c = mgu(eqs("f(x) = g(y)"))
    assert isinstance(c, Failure) and c.tag == "Clash" and not c
    o = mgu(eqs("x = f(x)"))
    assert isinstance(o, Failure) and o.tag == "OccursCheck"
    assert str(o) == "OccursCheck: x = f(x)"


def test_arity_mismatch_is_a_clash():
    u = mgu([(App("f", (Var("x"),)), App("f", (Var("x"), Var("y"))))])
    assert isinstance(u, Failure) and u.tag == "Clash"


def test_empty_system():
    assert mgu([]) == Unifier(())


def test_variable_valued():
    assert mgu(eqs("x = y, y = z")).is_variable_valued()
    assert not mgu(eqs("x = f(y)")).is_variable_valued()


def test_classify():
    assert classify(mgu(eqs("f(x) = g(x)"))) == "I"
    assert classify(mgu(eqs("y = f(g(y))"))) == "III"


@settings(max_examples=400, deadline=None)
@given(st.lists(st.tuples(terms(SIG, 2), terms(SIG, 2)), min_size=1, max_size=3))
def test_mgu_properties(pairs):
    u = mgu(pairs)
    if isinstance(u, Failure):
        assert u.tag in ("Clash", "OccursCheck")
        return
    assert u.is_idempotent()
    assert u.unifies(pairs)


@settings(max_examples=60, deadline=None)
@given(st.tuples(terms(Signature((("a", 0), ("f", 1)), ()), 1), terms(Signature((("a", 0), ("f", 1)), ()), 1)))
def test_mgu_is_most_general_small(pair):
    names = sorted({"x", "y"} | {v for t in pair for v in _names(t)})
    funs = (("a", 0), ("f", 1))
    u = mgu([pair])
    sols = list(solutions([pair], names, funs, 1))
    if isinstance(u, Failure):
        assert sols == []
        return
    for s in sols:
        assert instance_of(u.mapping, s, names)


def _names(t):
    if isinstance(t, Var):
        return {t.name}
    out = set()
    for a in t.args:
        out |= _names(a)
    return out
