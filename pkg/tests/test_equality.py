import pytest

from cohforce.corpus import FIXTURES
from cohforce.equality import (
    Discharged,
    Reduced,
    ReductionError,
    cycle_axiom,
    discharge_proof,
    girard_eriksson_reduce,
    tplus,
)
from cohforce.forcing import Forced, force
from cohforce.parser import parse_equation, parse_formula, parse_theory
from cohforce.proofs import Sequent, check_proof, prove
from cohforce.sites import TERMINAL, SiteKind
from cohforce.syntax import App, Var
from cohforce.unify import mgu


def load(name):
    return parse_theory((FIXTURES / f"{name}.theory").read_text())


@pytest.fixture(scope="module")
def cons():
    return load("constructors")


def test_relational_signature_has_no_constructor_axioms():
    ct = tplus(load("wraith").theory)
    assert ct.constructor_axioms == ()
    assert ct.equality  # reflexivity, symmetry, transitivity, congruence


def test_single_unary_function():
    ct = tplus(parse_theory("fun f/1\npred P/1\n").theory)
    assert ct.distinctness == ()
    assert len(ct.injectivity) == 1
    assert cycle_axiom("x", App("f", (Var("x"),))).disjuncts == ()


def test_two_constants_are_distinct():
    ct = tplus(load("bipointed").theory)
    (ax,) = ct.distinctness
    assert str(ax) == "0 = 1 => false"
    assert ct.injectivity == ()


def test_cycle_axiom_rejects_non_cycles():
    with pytest.raises(ValueError):
        cycle_axiom("x", Var("x"))
    with pytest.raises(ValueError):
        cycle_axiom("x", App("f", (Var("y"),)))


def test_axiom_for_failures(cons):
    ct = tplus(cons.theory)
    clash = mgu(parse_equation("f(x) = g(y)"))
    assert ct.axiom_for(clash).name == "distinct_f_g"
    occ = mgu(parse_equation("x = f(f(x))"))
    ax = ct.axiom_for(occ)
    assert ax.name == "acyclic_x" and ax.disjuncts == ()


def test_tplus_theory_extends_signature(cons):
    th = tplus(cons.theory).theory
    assert th.signature.with_equality
    assert len(th.axioms) > len(cons.theory.axioms)


def test_leibniz_reduces_and_proves(cons):
    r = girard_eriksson_reduce(cons.goals["leibniz"], cons.theory)
    assert isinstance(r, Reduced)
    # the unifier merges x and y; up to renaming the goal is forall w. P(w) -> P(w)
    assert r.goal == parse_formula("forall w. P(w) -> P(w)", cons.signature)
    p = prove(Sequent((), (), r.goal), cons.theory)
    assert p.status == "proved" and check_proof(p.proof, Sequent((), (), r.goal), cons.theory)


def test_clash_is_discharged(cons):
    r = girard_eriksson_reduce(cons.goals["clash"], cons.theory)
    assert isinstance(r, Discharged)
    assert r.failure.tag == "Clash"
    assert r.axiom.name == "distinct_f_g"


def test_reflexive_antecedent_is_dropped(cons):
    r = girard_eriksson_reduce(cons.goals["reflexive"], cons.theory)
    assert isinstance(r, Reduced)
    assert r.unifier.subst == ()
    assert r.goal == parse_formula("forall x. P(x) -> P(x)", cons.signature)


def test_cycle_is_discharged(cons):
    r = girard_eriksson_reduce(cons.goals["cycle"], cons.theory)
    assert isinstance(r, Discharged) and r.failure.tag == "OccursCheck"


def test_reduction_shape_errors(cons):
    with pytest.raises(ReductionError):
        girard_eriksson_reduce(parse_formula("forall x. P(x) -> (x = x -> P(x))", cons.signature.extended(True)), cons.theory)
    with pytest.raises(ReductionError):
        girard_eriksson_reduce(parse_formula("P(x)", cons.signature), cons.theory)


@pytest.mark.parametrize("goal", ["leibniz", "clash", "reflexive", "cycle"])
def test_reduction_agrees_with_forcing(cons, goal):
    phi = cons.goals[goal]
    forced = isinstance(force(SiteKind.TS, TERMINAL, phi, cons.theory), Forced)
    r = girard_eriksson_reduce(phi, cons.theory)
    if isinstance(r, Discharged):
        settled = True
    else:
        settled = prove(Sequent((), (), r.goal), cons.theory).status == "proved"
    assert forced == settled


@pytest.mark.parametrize(
    "text",
    [
        "forall x. f(x) = g(x) -> false",
        "forall x. g(x) = f(x) -> P(x)",
        "forall x. x = f(x) -> false",
        "forall x y. x = y & f(y) = y -> false",
        "forall x. f(x) = x -> P(x) -> false",
    ],
)
def test_discharge_proofs_check(cons, text):
    phi = parse_formula(text, cons.signature.extended(True))
    p, theory = discharge_proof(phi, cons.theory)
    assert check_proof(p, Sequent((), (), phi), theory)


def test_discharge_needs_direct_refutation(cons):
    from cohforce.proofs import ProofError

    phi = parse_formula("forall x. f(f(x)) = f(g(x)) -> false", cons.signature.extended(True))
    with pytest.raises(ProofError):
        discharge_proof(phi, cons.theory)
    with pytest.raises(ReductionError):
        discharge_proof(cons.goals["leibniz"], cons.theory)
