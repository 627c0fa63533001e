"""Random generators shared by the test modules."""

from __future__ import annotations

import random

from hypothesis import strategies as st

from cohforce.sites import Condition, Morphism, SiteKind
from cohforce.syntax import (
    BOT,
    TOP,
    And,
    App,
    Atom,
    Exists,
    Forall,
    Implies,
    Or,
    Signature,
    Var,
)

SIG_REL = Signature((), (("P", 1), ("Q", 2)), False)
SIG_FUN = Signature((("c", 0), ("f", 1)), (("P", 1), ("Q", 2)), False)


def random_term(rng: random.Random, names, sig: Signature, depth: int):
    funs = [(f, a) for f, a in sig.functions if a > 0 or depth >= 0]
    if depth <= 0 or not funs or rng.random() < 0.5:
        consts = list(sig.constants)
        if names and (not consts or rng.random() < 0.8):
            return Var(rng.choice(sorted(names)))
        if consts:
            return App(rng.choice(consts))
        return Var(rng.choice(sorted(names)))
    f, a = rng.choice(sorted(funs))
    return App(f, tuple(random_term(rng, names, sig, depth - 1) for _ in range(a)))


def random_atoms(rng: random.Random, names, sig: Signature, n: int, depth: int = 0) -> set:
    out = set()
    if not sig.predicates or (not names and not sig.constants):
        return out
    for _ in range(n):
        p, a = rng.choice(sorted(sig.predicates))
        out.add(Atom(p, tuple(random_term(rng, names, sig, depth) for _ in range(a))))
    return out


def random_condition(rng: random.Random, sig: Signature = SIG_REL, max_vars=3, max_atoms=3, prefix="x") -> Condition:
    names = [f"{prefix}{i}" for i in range(rng.randint(0, max_vars))]
    atoms = random_atoms(rng, names, sig, rng.randint(0, max_atoms))
    return Condition.of(names, atoms)


def random_morphism_into(rng: random.Random, cod: Condition, kind: SiteKind, sig: Signature = SIG_REL, prefix="y") -> Morphism:
    """A random morphism of the given site kind with codomain `cod`."""
    xs = sorted(cod.vars)
    pool = [f"{prefix}{i}" for i in range(len(xs) + 2)]
    if kind == SiteKind.RN:
        images = [Var(v) for v in rng.sample(pool, len(xs))]
    elif kind == SiteKind.VS:
        images = [Var(rng.choice(pool)) for _ in xs]
    else:
        images = [random_term(rng, pool, sig, 1) for _ in xs]
    sigma = dict(zip(xs, images))
    used = set()
    for t in images:
        used |= {v.name for v in _vars(t)}
    used |= set(rng.sample(pool, rng.randint(0, 1)))
    atoms = {a.subst(sigma) for a in cod.atoms}
    atoms |= random_atoms(rng, sorted(used), sig if kind == SiteKind.TS else Signature((), sig.predicates), rng.randint(0, 2))
    return Morphism.make(Condition.of(used, atoms), cod, sigma)


def _vars(t):
    if isinstance(t, Var):
        return {t}
    out = set()
    for a in t.args:
        out |= _vars(a)
    return out


# ---------------------------------------------------------- hypothesis


VAR_NAMES = st.sampled_from(["x", "y", "z", "w"])


def terms(sig: Signature = SIG_FUN, max_depth: int = 2):
    leaves = [VAR_NAMES.map(Var)]
    consts = sig.constants
    if consts:
        leaves.append(st.sampled_from(consts).map(App))
    base = st.one_of(*leaves)
    funs = [(f, a) for f, a in sig.functions if a > 0]
    if not funs or max_depth == 0:
        return base

    def extend(children):
        return st.one_of(
            *[st.tuples(*[children] * a).map(lambda args, f=f: App(f, args)) for f, a in funs]
        )

    return st.recursive(base, extend, max_leaves=2 ** max_depth)


def atoms(sig: Signature = SIG_FUN, equality: bool = False):
    preds = sorted(sig.predicates)
    t = terms(sig, 1)
    parts = [st.sampled_from(preds).flatmap(lambda pa: st.tuples(*[t] * pa[1]).map(lambda args, p=pa[0]: Atom(p, args)))]
    if equality:
        parts.append(st.tuples(t, t).map(lambda st_: Atom("=", st_)))
    return st.one_of(*parts)


def formulas(sig: Signature = SIG_FUN, equality: bool = False, max_leaves: int = 8):
    base = st.one_of(atoms(sig, equality), st.just(TOP), st.just(BOT))

    def extend(children):
        return st.one_of(
            st.lists(children, min_size=2, max_size=3).map(lambda ps: And(tuple(ps))),
            st.lists(children, min_size=2, max_size=3).map(lambda ps: Or(tuple(ps))),
            st.tuples(children, children).map(lambda p: Implies(*p)),
            st.tuples(VAR_NAMES, children).map(lambda p: Forall(*p)),
            st.tuples(VAR_NAMES, children).map(lambda p: Exists(*p)),
        )

    return st.recursive(base, extend, max_leaves=max_leaves)
