import pytest
from hypothesis import given, settings

from cohforce.parser import parse_formula
from cohforce.printer import format_axiom, format_formula
from cohforce.syntax import (
    BOT,
    TOP,
    And,
    App,
    Atom,
    CoherentAxiom,
    Exists,
    Forall,
    Implies,
    NotCoherentError,
    Or,
    Signature,
    SyntaxError_,
    Theory,
    Var,
    free_vars,
    fresh_name,
    is_generalized_geometric,
    is_positive,
    normalize_coherent,
    substitute,
)

from strategies import SIG_FUN, formulas

x, y, z, w = (Var(n) for n in "xyzw")


def P(t):
    return Atom("P", (t,))


def Q(s, t):
    return Atom("Q", (s, t))


def test_alpha_equivalence():
    assert Forall("x", P(x)) == Forall("y", P(y))
    assert hash(Exists("x", Q(x, z))) == hash(Exists("w", Q(w, z)))
    assert Forall("x", P(x)) != Forall("y", P(z))
    assert Forall("x", Exists("y", Q(x, y))) != Forall("x", Exists("y", Q(y, x)))


def test_free_vars():
    f = Forall("x", Implies(P(x), Q(x, y)))
    assert free_vars(f) == {"y"}


def test_substitution_avoids_capture():
    f = Forall("y", Q(x, y))
    g = substitute(f, {"x": y})
    assert free_vars(g) == {"y"}
    # the bound variable was renamed, so Q links the free y to the bound one
    assert g == Forall("u", Q(y, Var("u")))


def test_fresh_name():
    assert fresh_name("x", {"x", "x1"}) == "x2"
    assert fresh_name("y", set()) == "y"


def test_positive_and_geometric_classes():
    assert is_positive(Or((P(x), Exists("y", Q(x, y)))))
    assert not is_positive(Implies(P(x), P(x)))
    assert is_generalized_geometric(Forall("x", Implies(P(x), Exists("y", Q(x, y)))))
    bad = Implies(Forall("x", P(x)), BOT)
    check = is_generalized_geometric(bad)
    assert not check
    assert check.offender is not None


def test_signature_rejects_reserved_and_duplicates():
    with pytest.raises(SyntaxError_):
        Signature((), (("=", 2),))
    with pytest.raises(SyntaxError_):
        Signature((("f", 1),), (("f", 1),))
    with pytest.raises(SyntaxError_):
        Signature((), (("P", 1), ("P", 2)))


def test_axiom_scoping():
    with pytest.raises(SyntaxError_):
        CoherentAxiom(("x",), frozenset({Q(x, y)}), ())
    with pytest.raises(SyntaxError_):
        CoherentAxiom(("x",), frozenset(), ((("x",), frozenset()),))


def test_theory_checks_arity():
    sig = Signature((), (("P", 1),))
    with pytest.raises(SyntaxError_):
        Theory(sig, (CoherentAxiom(("x",), frozenset({Q(x, x)}), ()),))


def test_normalize_splits_antecedent_disjunction():
    sentence = Forall("x", Implies(Or((P(x), Exists("y", Q(x, y)))), Exists("z", Q(z, x))))
    axs = normalize_coherent(sentence)
    assert len(axs) == 2
    assert axs[0].univ == ("x",)
    assert len(axs[1].univ) == 2
    for ax in axs:
        assert len(ax.disjuncts) == 1


def test_normalize_rejects_negative_implication():
    with pytest.raises(NotCoherentError):
        normalize_coherent(Forall("x", Implies(Implies(P(x), P(x)), P(x))))
    with pytest.raises(NotCoherentError):
        normalize_coherent(P(x))


def test_axiom_formats_in_file_syntax():
    ax = CoherentAxiom(("x", "z"), frozenset({P(x)}), (((), frozenset({Q(x, z)})), (("w",), frozenset({Q(w, z)}))))
    assert format_axiom(ax) == "forall x z. P(x) => Q(x,z) | exists w. Q(w,z)"
    assert ax.to_formula() == Forall("x", Forall("z", Implies(P(x), Or((Q(x, z), Exists("w", Q(w, z)))))))


def test_printer_parenthesizes():
    f = Implies(Implies(P(x), P(y)), And((Or((P(x), P(y))), P(z))))
    assert format_formula(f) == "(P(x) -> P(y)) -> (P(x) | P(y)) & P(z)"
    assert format_formula(Forall("x", Forall("y", TOP))) == "forall x y. true"
    assert str(App("f", (App("c"), x))) == "f(c,x)"


@settings(max_examples=300, deadline=None)
@given(formulas(SIG_FUN.extended(True), equality=True))
def test_print_parse_round_trip(f):
    sig = SIG_FUN.extended(True)
    assert parse_formula(format_formula(f), sig) == f
