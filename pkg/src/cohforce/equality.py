"""Constructor axioms and the reduction of equational antecedents by unification."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .syntax import (
    And,
    App,
    Atom,
    CoherentAxiom,
    Exists,
    Formula,
    Forall,
    Implies,
    Or,
    Theory,
    Top,
    Var,
    eq_atom,
    forall_many,
    replace,
    free_vars,
    has_equality,
    substitute,
    term_key,
    term_vars,
)
from .unify import Failure, Unifier, mgu


class ReductionError(ValueError):
    pass


def _vars(prefix: str, n: int) -> tuple:
    return tuple(f"{prefix}{i}" for i in range(1, n + 1))


def equality_axioms(theory: Theory) -> tuple:
    """Reflexivity, symmetry, transitivity and congruence as coherent axioms."""
    x, y, z = Var("x"), Var("y"), Var("z")
    out = [
        CoherentAxiom(("x",), frozenset(), (((), frozenset([eq_atom(x, x)])),), "eq_refl"),
        CoherentAxiom(("x", "y"), frozenset([eq_atom(x, y)]), (((), frozenset([eq_atom(y, x)])),), "eq_sym"),
        CoherentAxiom(
            ("x", "y", "z"), frozenset([eq_atom(x, y), eq_atom(y, z)]), (((), frozenset([eq_atom(x, z)])),), "eq_trans"
        ),
    ]
    sig = theory.signature
    for name, ar in sorted(sig.functions):
        if ar == 0:
            continue
        xs, ys = _vars("x", ar), _vars("y", ar)
        ant = frozenset(eq_atom(Var(a), Var(b)) for a, b in zip(xs, ys))
        con = eq_atom(App(name, tuple(map(Var, xs))), App(name, tuple(map(Var, ys))))
        out.append(CoherentAxiom(xs + ys, ant, (((), frozenset([con])),), f"cong_{name}"))
    for name, ar in sorted(sig.predicates):
        if ar == 0:
            continue
        xs, ys = _vars("x", ar), _vars("y", ar)
        ant = frozenset(eq_atom(Var(a), Var(b)) for a, b in zip(xs, ys)) | {Atom(name, tuple(map(Var, xs)))}
        out.append(CoherentAxiom(xs + ys, ant, (((), frozenset([Atom(name, tuple(map(Var, ys)))])),), f"cong_{name}"))
    return tuple(out)


def distinctness_axiom(f: str, m: int, g: str, n: int) -> CoherentAxiom:
    """(I): f(x̄) = g(ȳ) → false."""
    xs, ys = _vars("x", m), _vars("y", n)
    a = eq_atom(App(f, tuple(map(Var, xs))), App(g, tuple(map(Var, ys))))
    return CoherentAxiom(xs + ys, frozenset([a]), (), f"distinct_{f}_{g}")


def injectivity_axiom(f: str, n: int) -> CoherentAxiom:
    """(II): f(x̄) = f(ȳ) → x̄ = ȳ."""
    xs, ys = _vars("x", n), _vars("y", n)
    a = eq_atom(App(f, tuple(map(Var, xs))), App(f, tuple(map(Var, ys))))
    con = frozenset(eq_atom(Var(p), Var(q)) for p, q in zip(xs, ys))
    return CoherentAxiom(xs + ys, frozenset([a]), (((), con),), f"inject_{f}")


def cycle_axiom(var: str, term) -> CoherentAxiom:
    """(III) at one pattern: x = t → false for t a proper term containing x."""
    if isinstance(term, Var) or var not in term_vars(term):
        raise ValueError(f"{var} = {term} is not a proper cycle")
    univ = tuple(sorted(term_vars(term)))
    return CoherentAxiom(univ, frozenset([eq_atom(Var(var), term)]), (), f"acyclic_{var}")


@dataclass(frozen=True)
class ConstructorTheory:
    """T with equality and the constructor axioms.

    Distinctness and injectivity are materialized; the acyclicity schema
    has infinitely many instances and is produced on demand by
    `cycle_axiom` from an occurs-check failure.
    """

    base: Theory
    equality: tuple
    distinctness: tuple
    injectivity: tuple

    @property
    def theory(self) -> Theory:
        sig = self.base.signature.extended(True)
        return Theory(sig, tuple(self.base.axioms) + self.equality + self.distinctness + self.injectivity)

    @property
    def constructor_axioms(self) -> tuple:
        return self.distinctness + self.injectivity

    def axiom_for(self, failure: Failure) -> CoherentAxiom:
        """The constructor axiom refuting the equation a unification failure exposes."""
        if failure.tag == "Clash":
            f, g = failure.left, failure.right
            pair = tuple(sorted([(f.fn, len(f.args)), (g.fn, len(g.args))]))
            for ax in self.distinctness:
                if ax.name == f"distinct_{pair[0][0]}_{pair[1][0]}":
                    return ax
            raise ReductionError(f"no distinctness axiom for {f.fn}, {g.fn}")
        if failure.tag == "OccursCheck":
            return cycle_axiom(failure.left.name, failure.right)
        raise ReductionError(f"unknown failure tag {failure.tag}")


def tplus(theory: Theory) -> ConstructorTheory:
    fns = sorted(theory.signature.functions)
    distinct = tuple(distinctness_axiom(f, m, g, n) for (f, m), (g, n) in itertools.combinations(fns, 2))
    inject = tuple(injectivity_axiom(f, n) for f, n in fns if n > 0)
    return ConstructorTheory(theory, equality_axioms(theory), distinct, inject)


def classify(failure: Failure) -> str:
    """Constructor axiom family a unification failure corresponds to."""
    return {"Clash": "I", "OccursCheck": "III"}[failure.tag]


# --------------------------------------------------------- reduction


@dataclass(frozen=True)
class Discharged:
    """The equations have no unifier; T⁺ refutes them outright."""

    failure: Failure
    axiom: CoherentAxiom
    status = "discharged"


@dataclass(frozen=True)
class Reduced:
    """The goal reduced along the most general unifier to an equation-free one."""

    goal: Formula  # closed: universally quantified over the unifier's codomain
    unifier: Unifier
    context: tuple
    status = "reduced"


def _split(goal: Formula):
    univ = []
    f = goal
    while isinstance(f, Forall):
        univ.append(f.var)
        f = f.body
    eqs = []
    while isinstance(f, Implies):
        ant = f.ant
        atoms = list(ant.parts) if isinstance(ant, And) else [ant]
        if isinstance(ant, Top):
            atoms = []
        if not all(isinstance(a, Atom) and a.is_equality for a in atoms):
            break
        eqs.extend(atoms)
        f = f.cons
    return univ, eqs, f


def _equational_antecedent(f: Formula) -> bool:
    if isinstance(f, Implies):
        return has_equality(f.ant) or _equational_antecedent(f.cons)
    if isinstance(f, (Forall, Exists)):
        return _equational_antecedent(f.body)
    if isinstance(f, (And, Or)):
        return any(_equational_antecedent(p) for p in f.parts)
    return False


def girard_eriksson_reduce(goal: Formula, theory: Theory):
    """Settle the equations of ``forall x̄. s̄ = t̄ -> psi`` by unification.

    Returns Discharged when they cannot be unified, otherwise Reduced with
    psi under the most general unifier.
    """
    if free_vars(goal):
        raise ReductionError("goal must be a sentence")
    univ, eqs, psi = _split(goal)
    if _equational_antecedent(psi):
        raise ReductionError(f"equations remain in an antecedent of {psi}")
    ct = tplus(theory)
    u = mgu([(a.args[0], a.args[1]) for a in eqs])
    if isinstance(u, Failure):
        return Discharged(u, ct.axiom_for(u))
    m = u.on(univ)
    ys = tuple(sorted(u.codomain_vars(univ) | (free_vars(psi) - set(univ)), key=lambda v: term_key(Var(v))))
    reduced = forall_many(ys, substitute(psi, m))
    return Reduced(reduced, u, ys)


# ----------------------------------------------- proofs of discharged goals


def _instantiate(ax_index: int, ax: CoherentAxiom, terms, ctx, hyps):
    from .proofs import ProofTree

    node = ProofTree("axiom", ctx, hyps, ax.to_formula(), (), (ax_index,))
    for t in terms:
        f = node.concl
        node = ProofTree("all_e", ctx, hyps, replace(f.body, {f.var: t}), (node,), (t,))
    return node


def _refuting_axiom(eq: Atom, ct: ConstructorTheory):
    """(axiom, oriented) for an equation refuted without rewriting, or None."""
    s, t = eq.args
    for a, b, flipped in ((s, t, False), (t, s, True)):
        if isinstance(a, App) and isinstance(b, App) and (a.fn, len(a.args)) != (b.fn, len(b.args)):
            if (a.fn, len(a.args)) > (b.fn, len(b.args)):
                continue
            ax = ct.axiom_for(Failure("Clash", a, b))
            return ax, tuple(a.args) + tuple(b.args), flipped
        if isinstance(a, Var) and not isinstance(b, Var) and a.name in term_vars(b):
            ax = cycle_axiom(a.name, b)
            return ax, tuple(Var(v) for v in ax.univ), flipped
    return None


def discharge_proof(goal: Formula, theory: Theory):
    """A natural-deduction proof of a discharged goal in the constructor theory.

    Handles goals where one antecedent equation is refuted outright by a
    distinctness or acyclicity axiom, in either orientation.  Returns
    ``(proof, theory)``; the theory is T⁺ plus the acyclicity instance
    used, if any.  Failures deeper inside terms need injectivity and
    congruence rewriting, which is not attempted.
    """
    from .proofs import ProofError, ProofTree, hyp

    r = girard_eriksson_reduce(goal, theory)
    if not isinstance(r, Discharged):
        raise ReductionError("the goal's equations are unifiable")
    ct = tplus(theory)
    full = ct.theory
    univ, _, _ = _split(goal)
    ctx = frozenset(univ)
    if len(ctx) != len(univ):
        raise ReductionError("repeated universal variable")
    # peel the quantifiers and equational antecedents
    layers = []
    f = goal
    for _ in univ:
        f = f.body
    hyps: frozenset = frozenset()
    eq_proofs = []
    while isinstance(f, Implies) and _all_eq(f.ant):
        layers.append((f, hyps))
        hyps = hyps | {f.ant}
        if isinstance(f.ant, And):
            for i, a in enumerate(f.ant.parts):
                eq_proofs.append((a, ProofTree("and_e", ctx, hyps, a, (hyp(f.ant, ctx, hyps),), (i,))))
        elif isinstance(f.ant, Atom):
            eq_proofs.append((f.ant, hyp(f.ant, ctx, hyps)))
        f = f.cons
    psi = f
    bottom = None
    for eq, pe in eq_proofs:
        found = _refuting_axiom(eq, ct)
        if found is None:
            continue
        ax, terms, flipped = found
        if ax not in full.axioms:
            full = Theory(full.signature, full.axioms + (ax,))
        idx = full.axioms.index(ax)
        if flipped:
            s, t = eq.args
            sym = _instantiate(full.axioms.index(ct.equality[1]), ct.equality[1], (s, t), ctx, hyps)
            pe = ProofTree("imp_e", ctx, hyps, sym.concl.cons, (sym, pe))
        inst = _instantiate(idx, ax, terms, ctx, hyps)
        if inst.concl.ant != pe.concl:
            continue
        bottom = ProofTree("imp_e", ctx, hyps, inst.concl.cons, (inst, pe))
        break
    if bottom is None:
        raise ProofError("no antecedent equation is refuted by a single constructor axiom")
    p = bottom if psi == bottom.concl else ProofTree("bot_e", ctx, hyps, psi, (bottom,))
    for imp, h in reversed(layers):
        p = ProofTree("imp_i", ctx, h, imp, (p,))
    body = goal
    bodies = []
    for v in univ:
        bodies.append(body)
        body = body.body
    for i in reversed(range(len(univ))):
        p = ProofTree("all_i", frozenset(univ[:i]), frozenset(), bodies[i], (p,), (univ[i],))
    return p, full


def _all_eq(f: Formula) -> bool:
    atoms = list(f.parts) if isinstance(f, And) else [f]
    return all(isinstance(a, Atom) and a.is_equality for a in atoms)


__all__ = [
    "ConstructorTheory",
    "Discharged",
    "Reduced",
    "ReductionError",
    "classify",
    "cycle_axiom",
    "discharge_proof",
    "distinctness_axiom",
    "equality_axioms",
    "girard_eriksson_reduce",
    "injectivity_axiom",
    "mgu",
    "tplus",
]
