"""Terms, atoms, formulas and coherent axioms.

Everything here is immutable.  Formulas compare up to renaming of bound
variables; atoms and terms compare structurally.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, NamedTuple, Union

EQ = "="


class SyntaxError_(ValueError):
    """Ill-formed syntax object (arity mismatch, stray variable, ...)."""


class SubstitutionError(ValueError):
    pass


class NotCoherentError(ValueError):
    """Raised by `normalize_coherent` with the offending subformula."""

    def __init__(self, message: str, offender: "Formula"):
        super().__init__(f"{message}: {offender}")
        self.offender = offender


# ---------------------------------------------------------------- terms


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class App:
    fn: str
    args: tuple = ()

    def __str__(self) -> str:
        if not self.args:
            return self.fn
        return f"{self.fn}({','.join(str(a) for a in self.args)})"


Term = Union[Var, App]
Subst = Mapping[str, Term]


def term_vars(t: Term) -> frozenset:
    if isinstance(t, Var):
        return frozenset((t.name,))
    out: set = set()
    for a in t.args:
        out |= term_vars(a)
    return frozenset(out)


def term_depth(t: Term) -> int:
    """Nesting depth of applications; variables and constants have depth 0."""
    if isinstance(t, Var) or not t.args:
        return 0
    return 1 + max(term_depth(a) for a in t.args)


def term_key(t: Term) -> tuple:
    """Sort key: depth first, then the printed form."""
    return (term_depth(t), str(t))


def subterms(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, App):
        for a in t.args:
            yield from subterms(a)


def subst_term(t: Term, sigma: Subst) -> Term:
    """Apply `sigma`; variables outside its domain are left alone."""
    if isinstance(t, Var):
        return sigma.get(t.name, t)
    if not t.args:
        return t
    return App(t.fn, tuple(subst_term(a, sigma) for a in t.args))


def occurs(name: str, t: Term) -> bool:
    return name in term_vars(t)


def match_term(pattern: Term, target: Term, sigma: dict) -> dict | None:
    """One-sided matching: extend `sigma` so that pattern*sigma == target.

    Variables of `target` are treated as opaque constants, so pattern and
    target may share variable names.
    """
    if isinstance(pattern, Var):
        bound = sigma.get(pattern.name)
        if bound is None:
            out = dict(sigma)
            out[pattern.name] = target
            return out
        return sigma if bound == target else None
    if not isinstance(target, App) or target.fn != pattern.fn or len(target.args) != len(pattern.args):
        return None
    for p, q in zip(pattern.args, target.args):
        sigma = match_term(p, q, sigma)
        if sigma is None:
            return None
    return sigma


_SUFFIX = re.compile(r"^(.*?)(\d+)$")


def fresh_name(base: str, avoid: Iterable[str]) -> str:
    """`base` itself if unused, else `base` with the smallest free numeric suffix."""
    avoid = set(avoid)
    if base not in avoid:
        return base
    m = _SUFFIX.match(base)
    root = m.group(1) if m and m.group(1) else base
    for i in itertools.count(1):
        cand = f"{root}{i}"
        if cand not in avoid:
            return cand
    raise AssertionError("unreachable")


# ------------------------------------------------------------- formulas


class Formula:
    """Base class.  Equality and hashing are up to alpha-equivalence."""

    __slots__ = ()

    def _key(self, env: dict) -> tuple:
        raise NotImplementedError

    @cached_property
    def alpha_key(self) -> tuple:
        return self._key({})

    def __eq__(self, other):
        if not isinstance(other, Formula):
            return NotImplemented
        return self.alpha_key == other.alpha_key

    def __hash__(self):
        return hash(self.alpha_key)

    def __str__(self) -> str:
        from .printer import format_formula

        return format_formula(self)

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self}>"


def _tkey(t: Term, env: dict):
    if isinstance(t, Var):
        return ("b", env[t.name]) if t.name in env else ("v", t.name)
    return ("f", t.fn, tuple(_tkey(a, env) for a in t.args))


@dataclass(frozen=True, eq=False, repr=False)
class Atom(Formula):
    pred: str
    args: tuple = ()

    def _key(self, env):
        return ("atom", self.pred, tuple(_tkey(a, env) for a in self.args))

    # structural equality is alpha-equality for atoms; keep it cheap
    def __eq__(self, other):
        if isinstance(other, Atom):
            return self.pred == other.pred and self.args == other.args
        return Formula.__eq__(self, other)

    def __hash__(self):
        return hash(self.alpha_key)

    @property
    def is_equality(self) -> bool:
        return self.pred == EQ

    def vars(self) -> frozenset:
        out: set = set()
        for a in self.args:
            out |= term_vars(a)
        return frozenset(out)

    def subst(self, sigma: Subst) -> "Atom":
        return Atom(self.pred, tuple(subst_term(a, sigma) for a in self.args))


def eq_atom(s: Term, t: Term) -> Atom:
    return Atom(EQ, (s, t))


@dataclass(frozen=True, eq=False, repr=False)
class Top(Formula):
    def _key(self, env):
        return ("top",)


@dataclass(frozen=True, eq=False, repr=False)
class Bot(Formula):
    def _key(self, env):
        return ("bot",)


@dataclass(frozen=True, eq=False, repr=False)
class And(Formula):
    parts: tuple

    def _key(self, env):
        return ("and", tuple(p._key(env) for p in self.parts))


@dataclass(frozen=True, eq=False, repr=False)
class Or(Formula):
    parts: tuple

    def _key(self, env):
        return ("or", tuple(p._key(env) for p in self.parts))


@dataclass(frozen=True, eq=False, repr=False)
class Implies(Formula):
    ant: Formula
    cons: Formula

    def _key(self, env):
        return ("imp", self.ant._key(env), self.cons._key(env))


@dataclass(frozen=True, eq=False, repr=False)
class Forall(Formula):
    var: str
    body: Formula

    def _key(self, env):
        depth = env.get(None, 0)
        inner = dict(env)
        inner[self.var] = depth
        inner[None] = depth + 1
        return ("all", self.body._key(inner))


@dataclass(frozen=True, eq=False, repr=False)
class Exists(Formula):
    var: str
    body: Formula

    def _key(self, env):
        depth = env.get(None, 0)
        inner = dict(env)
        inner[self.var] = depth
        inner[None] = depth + 1
        return ("ex", self.body._key(inner))


TOP = Top()
BOT = Bot()


def conj(parts: Iterable[Formula]) -> Formula:
    parts = tuple(parts)
    if not parts:
        return TOP
    if len(parts) == 1:
        return parts[0]
    return And(parts)


def disj(parts: Iterable[Formula]) -> Formula:
    parts = tuple(parts)
    if not parts:
        return BOT
    if len(parts) == 1:
        return parts[0]
    return Or(parts)


def forall_many(names: Iterable[str], body: Formula) -> Formula:
    for n in reversed(tuple(names)):
        body = Forall(n, body)
    return body


def exists_many(names: Iterable[str], body: Formula) -> Formula:
    for n in reversed(tuple(names)):
        body = Exists(n, body)
    return body


def neg(f: Formula) -> Formula:
    return Implies(f, BOT)


def free_vars(f: Formula) -> frozenset:
    if isinstance(f, Atom):
        return f.vars()
    if isinstance(f, (Top, Bot)):
        return frozenset()
    if isinstance(f, (And, Or)):
        out: frozenset = frozenset()
        for p in f.parts:
            out |= free_vars(p)
        return out
    if isinstance(f, Implies):
        return free_vars(f.ant) | free_vars(f.cons)
    if isinstance(f, (Forall, Exists)):
        return free_vars(f.body) - {f.var}
    raise TypeError(f"not a formula: {f!r}")


def atoms_of(f: Formula) -> Iterator[Atom]:
    if isinstance(f, Atom):
        yield f
    elif isinstance(f, (And, Or)):
        for p in f.parts:
            yield from atoms_of(p)
    elif isinstance(f, Implies):
        yield from atoms_of(f.ant)
        yield from atoms_of(f.cons)
    elif isinstance(f, (Forall, Exists)):
        yield from atoms_of(f.body)


def formula_terms(f: Formula) -> set:
    """All subterms occurring in `f` (bound variables included)."""
    out: set = set()
    for a in atoms_of(f):
        for t in a.args:
            out.update(subterms(t))
    return out


def replace(f: Formula, sigma: Subst) -> Formula:
    """Capture-avoiding simultaneous substitution; partial `sigma` allowed."""
    if isinstance(f, Atom):
        return f.subst(sigma)
    if isinstance(f, (Top, Bot)):
        return f
    if isinstance(f, And):
        return And(tuple(replace(p, sigma) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(replace(p, sigma) for p in f.parts))
    if isinstance(f, Implies):
        return Implies(replace(f.ant, sigma), replace(f.cons, sigma))
    if isinstance(f, (Forall, Exists)):
        fv = free_vars(f)
        inner = {k: v for k, v in sigma.items() if k != f.var and k in fv}
        rng: set = set()
        for t in inner.values():
            rng |= term_vars(t)
        var = f.var
        if var in rng:
            var = fresh_name(var, rng | free_vars(f.body) | set(inner))
            inner[f.var] = Var(var)
        return type(f)(var, replace(f.body, inner))
    raise TypeError(f"not a formula: {f!r}")


def substitute(f: Formula, sigma: Subst) -> Formula:
    """Capture-avoiding substitution; `sigma` must cover every free variable."""
    missing = free_vars(f) - set(sigma)
    if missing:
        raise SubstitutionError(f"substitution not total on free variables {sorted(missing)}")
    return replace(f, sigma)


def is_positive(f: Formula) -> bool:
    """Built from atoms, true, false, &, | and exists only."""
    if isinstance(f, (Atom, Top, Bot)):
        return True
    if isinstance(f, (And, Or)):
        return all(is_positive(p) for p in f.parts)
    if isinstance(f, Exists):
        return is_positive(f.body)
    return False


class GGCheck(NamedTuple):
    ok: bool
    offender: Formula | None = None

    def __bool__(self) -> bool:
        return self.ok


def is_generalized_geometric(f: Formula) -> GGCheck:
    """Membership in the generalized geometric grammar.

    Implications are allowed only with an atomic antecedent (a predicate
    atom, an equation, true or false).  On failure the first violating
    subformula is returned.
    """
    if isinstance(f, (Atom, Top, Bot)):
        return GGCheck(True)
    if isinstance(f, (And, Or)):
        for p in f.parts:
            r = is_generalized_geometric(p)
            if not r:
                return r
        return GGCheck(True)
    if isinstance(f, (Forall, Exists)):
        return is_generalized_geometric(f.body)
    if isinstance(f, Implies):
        if not isinstance(f.ant, (Atom, Top, Bot)):
            return GGCheck(False, f.ant)
        return is_generalized_geometric(f.cons)
    raise TypeError(f"not a formula: {f!r}")


def has_equality(f: Formula) -> bool:
    return any(a.is_equality for a in atoms_of(f))


# ------------------------------------------------------- signatures etc.


@dataclass(frozen=True)
class Signature:
    functions: tuple = ()
    predicates: tuple = ()
    with_equality: bool = False

    def __post_init__(self):
        fnames = [n for n, _ in self.functions]
        pnames = [n for n, _ in self.predicates]
        if len(set(fnames)) != len(fnames):
            raise SyntaxError_("duplicate function symbol")
        if len(set(pnames)) != len(pnames):
            raise SyntaxError_("duplicate predicate symbol")
        if EQ in pnames:
            raise SyntaxError_("'=' is reserved and cannot be declared")
        if set(fnames) & set(pnames):
            raise SyntaxError_("a name is declared both as function and predicate")
        for _, ar in tuple(self.functions) + tuple(self.predicates):
            if ar < 0:
                raise SyntaxError_("negative arity")

    @cached_property
    def fun_arity(self) -> dict:
        return dict(self.functions)

    @cached_property
    def pred_arity(self) -> dict:
        return dict(self.predicates)

    def is_relational(self) -> bool:
        return not self.functions

    @property
    def constants(self) -> tuple:
        return tuple(sorted(n for n, a in self.functions if a == 0))

    @property
    def has_proper_functions(self) -> bool:
        return any(a > 0 for _, a in self.functions)

    def check_term(self, t: Term, allowed_vars=None) -> None:
        if isinstance(t, Var):
            if allowed_vars is not None and t.name not in allowed_vars:
                raise SyntaxError_(f"variable {t.name} not in context")
            return
        if self.fun_arity.get(t.fn) != len(t.args):
            raise SyntaxError_(f"bad application {t}")
        for a in t.args:
            self.check_term(a, allowed_vars)

    def check_atom(self, a: Atom, allowed_vars=None) -> None:
        if a.is_equality:
            if not self.with_equality:
                raise SyntaxError_("equality atom in a signature without equality")
            if len(a.args) != 2:
                raise SyntaxError_("equality takes two arguments")
        elif self.pred_arity.get(a.pred) != len(a.args):
            raise SyntaxError_(f"bad atom {a}")
        for t in a.args:
            self.check_term(t, allowed_vars)

    def check_formula(self, f: Formula) -> None:
        for a in atoms_of(f):
            self.check_atom(a)

    def extended(self, with_equality: bool = True) -> "Signature":
        return Signature(self.functions, self.predicates, with_equality)


def _sorted_atoms(atoms: Iterable[Atom]) -> tuple:
    return tuple(sorted(atoms, key=str))


@dataclass(frozen=True)
class CoherentAxiom:
    """forall univ. (antecedent -> exists x1.phi1 | ... | exists xk.phik)."""

    univ: tuple
    antecedent: frozenset
    disjuncts: tuple  # of (tuple of fresh var names, frozenset of atoms)
    name: str = field(default="", compare=False)

    def __post_init__(self):
        uv = set(self.univ)
        if len(uv) != len(self.univ):
            raise SyntaxError_("repeated universal variable")
        for a in self.antecedent:
            if not a.vars() <= uv:
                raise SyntaxError_(f"antecedent atom {a} uses a non-universal variable")
        for ex, atoms in self.disjuncts:
            if set(ex) & uv or len(set(ex)) != len(ex):
                raise SyntaxError_("existential variables must be distinct and fresh")
            for a in atoms:
                if not a.vars() <= uv | set(ex):
                    raise SyntaxError_(f"disjunct atom {a} uses an unbound variable")

    def consequent(self) -> Formula:
        return disj(exists_many(ex, conj(_sorted_atoms(atoms))) for ex, atoms in self.disjuncts)

    def to_formula(self, curried: bool = False) -> Formula:
        ants = _sorted_atoms(self.antecedent)
        if curried:
            body = self.consequent()
            for a in reversed(ants):
                body = Implies(a, body)
            if not ants:
                body = Implies(TOP, body)
        else:
            body = Implies(conj(ants), self.consequent())
        return forall_many(self.univ, body)

    def __str__(self) -> str:
        from .printer import format_axiom

        return format_axiom(self)


@dataclass(frozen=True)
class Theory:
    signature: Signature
    axioms: tuple = ()

    def __post_init__(self):
        for ax in self.axioms:
            for a in ax.antecedent:
                self.signature.check_atom(a)
            for _, atoms in ax.disjuncts:
                for a in atoms:
                    self.signature.check_atom(a)


# ------------------------------------------------------ normalization


def _positive_dnf(f: Formula, avoid: set) -> list:
    """Disjunctive normal form of a positive formula: list of (vars, atoms).

    Bound variables are renamed apart from `avoid` (which is extended).
    """
    if isinstance(f, Atom):
        return [((), frozenset((f,)))]
    if isinstance(f, Top):
        return [((), frozenset())]
    if isinstance(f, Bot):
        return []
    if isinstance(f, Or):
        out = []
        for p in f.parts:
            out.extend(_positive_dnf(p, avoid))
        return out
    if isinstance(f, And):
        acc = [((), frozenset())]
        for p in f.parts:
            ds = _positive_dnf(p, avoid)
            acc = [(v1 + v2, a1 | a2) for v1, a1 in acc for v2, a2 in ds]
        return acc
    if isinstance(f, Exists):
        new = fresh_name(f.var, avoid)
        avoid.add(new)
        body = replace(f.body, {f.var: Var(new)}) if new != f.var else f.body
        return [((new,) + vs, atoms) for vs, atoms in _positive_dnf(body, avoid)]
    raise NotCoherentError("not a positive formula", f)


def _dedupe_vars(vs: tuple) -> tuple:
    seen: list = []
    for v in vs:
        if v not in seen:
            seen.append(v)
    return tuple(seen)


def normalize_coherent(sentence: Formula) -> list:
    """Split a coherent implication into axioms of the normal form.

    Accepts ``forall xs. (positive -> positive)``, a bare positive sentence,
    and conjunctions of such.  Antecedent disjunctions split into several
    axioms; antecedent existentials become universal variables.
    """
    if isinstance(sentence, And):
        out = []
        for p in sentence.parts:
            out.extend(normalize_coherent(p))
        return out
    univ: list = []
    body = sentence
    while isinstance(body, Forall):
        univ.append(body.var)
        body = body.body
    if len(set(univ)) != len(univ):
        raise NotCoherentError("repeated universal variable", sentence)
    if isinstance(body, Implies):
        ant, cons = body.ant, body.cons
    else:
        ant, cons = TOP, body
    if not is_positive(ant):
        raise NotCoherentError("antecedent is not positive", _first_nonpositive(ant))
    if not is_positive(cons):
        raise NotCoherentError("consequent is not positive", _first_nonpositive(cons))
    extra = free_vars(sentence)
    if extra:
        raise NotCoherentError(f"free variables {sorted(extra)}", sentence)
    axioms = []
    avoid = set(univ)
    for ant_vars, ant_atoms in _positive_dnf(ant, avoid):
        uv = tuple(univ) + ant_vars
        disjuncts = []
        for ex, atoms in _positive_dnf(cons, set(avoid)):
            disjuncts.append((_dedupe_vars(ex), atoms))
        # x_i must only contain used bound names; keep all, they are fresh
        axioms.append(CoherentAxiom(uv, ant_atoms, tuple(disjuncts)))
    return axioms


def _first_nonpositive(f: Formula) -> Formula:
    if isinstance(f, (And, Or)):
        for p in f.parts:
            if not is_positive(p):
                return _first_nonpositive(p)
    if isinstance(f, Exists) and not is_positive(f.body):
        return _first_nonpositive(f.body)
    return f
