import pytest

from cohforce.corpus import FIXTURES
from cohforce.parser import (
    ParseError,
    parse_condition,
    parse_equation,
    parse_formula,
    parse_term,
    parse_theory,
)
from cohforce.syntax import BOT, App, Atom, Implies, Signature, Var

SIG = Signature((("c", 0), ("f", 1)), (("P", 1), ("Q", 2)), False)


def test_theory_file():
    tf = parse_theory((FIXTURES / "wraith.theory").read_text())
    assert tf.signature.pred_arity == {"P": 1, "Q": 2, "R": 2}
    (ax,) = tf.theory.axioms
    assert ax.name == "split"
    assert len(ax.disjuncts) == 2
    assert list(tf.goals)[0] == "kernel"


def test_comments_and_blank_lines():
    tf = parse_theory("# header\n\npred P/1   # trailing\naxiom true => exists x. P(x)\n")
    (ax,) = tf.theory.axioms
    assert ax.univ == () and ax.disjuncts[0][0] == ("x",)


def test_false_consequent():
    tf = parse_theory("pred P/1\naxiom forall x. P(x) => false\n")
    assert tf.theory.axioms[0].disjuncts == ()


def test_negation_sugar():
    f = parse_formula("~P(c)", SIG)
    assert f == Implies(Atom("P", (App("c"),)), BOT)


def test_precedence():
    f = parse_formula("P(x) & P(c) | Q(x,x) -> P(x)", SIG)
    assert isinstance(f, Implies)
    g = parse_formula("P(x) -> P(c) -> P(x)", SIG)
    assert isinstance(g.cons, Implies)


def test_terms_and_conditions():
    assert parse_term("f(f(c))", SIG) == App("f", (App("f", (App("c"),)),))
    c = parse_condition("x,y : P(x), Q(x,y)", SIG)
    assert c.vars == {"x", "y"} and len(c.atoms) == 2
    assert parse_condition(":", SIG).vars == frozenset()
    assert parse_condition("", SIG).atoms == frozenset()
    assert parse_condition("x", SIG).vars == {"x"}


def test_equation_inference():
    pairs = parse_equation("f(x, g(y)) = f(c(), z), u = v")
    assert len(pairs) == 2
    assert pairs[0][1] == App("f", (App("c"), Var("z")))


@pytest.mark.parametrize(
    "text, line, col, fragment",
    [
        ("pred P/1\naxiom P(x) => P(x)\n", 2, 7, "non-universal"),
        ("pred P/1\ngoal g : P(x,y)\n", 2, 10, "expects 1 arguments"),
        ("pred P/1\ngoal g : R(x)\n", 2, 10, "unknown predicate R"),
        ("pred P/1\ngoal g : x = x\n", 2, 12, "equality is off"),
        ("pred P/1\npred P/2\n", 2, 6, "declared twice"),
        ("pred P/x\n", 1, 8, "arity must be a number"),
        ("pred P/1\nbogus\n", 2, 1, "unknown declaration"),
        ("pred P/1\ngoal g : P(x) &\n", 2, 16, "unexpected end of input"),
        ("pred P/1\ngoal g : P(x) $\n", 2, 15, "unexpected character"),
    ],
)
def test_diagnostics(text, line, col, fragment):
    with pytest.raises(ParseError) as info:
        parse_theory(text)
    err = info.value
    assert fragment in err.message
    assert (err.line, err.col) == (line, col)


def test_expected_tokens_reported():
    with pytest.raises(ParseError) as info:
        parse_formula("P(x) &", SIG)
    assert "atom" in info.value.expected


def test_conditions_reject_equations():
    with pytest.raises(ParseError):
        parse_condition("x : x = x", SIG.extended(True))


def test_all_fixture_theories_parse():
    for path in sorted(FIXTURES.glob("*.theory")):
        tf = parse_theory(path.read_text())
        for f in tf.goals.values():
            tf.signature.extended(True).check_formula(f)
