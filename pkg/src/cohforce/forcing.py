"""A bounded forcing checker that returns replayable certificates.

``force`` answers Forced (with a witness), NotForced (with a countermodel)
or Unknown (a bound ran out).  Forced and NotForced are definitive; every
certificate can be re-verified by ``check_witness`` / ``check_countermodel``
without running the search again.

Positive goals are decided by a restricted chase.  Each branch of the chase
is a path of axiom steps, so a successful run is literally a cover
derivation.  A branch that closes under every axiom instance without
meeting the goal is a Herbrand model of the theory receiving the root
condition, and every leg of every cover maps into it; it therefore refutes
the goal in each of the three sites.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace as dc_replace

from .coverage import (
    AxiomInstance,
    AxiomStep,
    Derivation,
    IsoBase,
    axiom_instances,
    check_derivation,
    check_equality_free,
    graft,
    pullback_cover,
    pullback_cover_maps,
    trivial,
)
from .sites import (
    Condition,
    Morphism,
    MorphismError,
    SiteKind,
    compose,
    enumerate_terms,
    factor_through,
    identity,
    sorted_atoms,
)
from .syntax import (
    And,
    App,
    Atom,
    Bot,
    Exists,
    Forall,
    Formula,
    Implies,
    Or,
    Signature,
    SyntaxError_,
    Theory,
    Top,
    Var,
    _positive_dnf,
    conj,
    forall_many,
    formula_terms,
    free_vars,
    fresh_name,
    is_positive,
    match_term,
    replace,
    subst_term,
    substitute,
    subterms,
    term_depth,
    term_key,
    term_vars,
)
from .unify import Failure, mgu


class ForcingError(ValueError):
    pass


@dataclass(frozen=True)
class Bounds:
    """Search limits.

    cover_depth: chase rounds (each round applies every instance that was
    open when it started).  fresh_vars: existential witnesses per chase
    branch, and new variables in enumerated morphisms.  atom_budget: extra
    facts in enumerated morphism domains.  term_depth: depth of enumerated
    terms.  max_morphisms: cap on morphisms tried per negative clause.
    """

    cover_depth: int = 3
    fresh_vars: int = 2
    atom_budget: int = 1
    term_depth: int = 1
    max_morphisms: int = 400

    def __post_init__(self):
        for k in ("cover_depth", "fresh_vars", "atom_budget", "term_depth", "max_morphisms"):
            if getattr(self, k) < 0:
                raise ValueError(f"{k} must be non-negative")

    def doubled(self) -> "Bounds":
        return Bounds(*(2 * getattr(self, k) for k in ("cover_depth", "fresh_vars", "atom_budget", "term_depth", "max_morphisms")))


# ------------------------------------------------------------ verdicts


@dataclass(frozen=True)
class Forced:
    witness: object
    status = "Forced"

    def __bool__(self):
        return True


@dataclass(frozen=True)
class NotForced:
    countermodel: object
    status = "NotForced"

    def __bool__(self):
        return False


@dataclass(frozen=True)
class Unknown:
    reason: str
    status = "Unknown"

    def __bool__(self):
        return False


Verdict = Forced | NotForced | Unknown


# ------------------------------------------------------------ witnesses


@dataclass(frozen=True)
class TopW:
    pass


@dataclass(frozen=True)
class FactW:
    deriv: Derivation  # every leg contains the fact


@dataclass(frozen=True)
class EqW:
    deriv: Derivation  # every leg identifies the two sides


@dataclass(frozen=True)
class BotW:
    deriv: Derivation  # empty sink


@dataclass(frozen=True)
class OrW:
    deriv: Derivation
    legs: tuple  # per leaf: (disjunct index, witness)


@dataclass(frozen=True)
class ExistsW:
    deriv: Derivation
    legs: tuple  # per leaf: (term, witness)


@dataclass(frozen=True)
class AndW:
    parts: tuple


@dataclass(frozen=True)
class ImpliesW:
    """Witness for an implication; `mode` names the reduction used.

    top/bot/atom: antecedent true, false or a fact (sub lives at C plus the
    fact).  eq: equation antecedent, sub lives at the domain of the most
    general unifier `morphism`.  eq-vacuous: the equation is never forced.
    dnf: positive antecedent curried into `rewritten`.  cons: the
    consequent is already forced.
    """

    mode: str
    sub: object = None
    antecedent: Atom | None = None
    morphism: Morphism | None = None
    rewritten: Formula | None = None


@dataclass(frozen=True)
class ForallW:
    var: str  # fresh name of the generic element
    generic: object  # witness at (X, var; A)
    instances: tuple = ()  # (term, witness at C) where the site needs them


@dataclass(frozen=True)
class ForallEnumW:
    var: str
    entries: tuple  # (morphism f: D -> C, term in Tm(D), witness at D)


# --------------------------------------------------------- countermodels


@dataclass(frozen=True)
class ClosureEntry:
    instance: AxiomInstance  # at the branch
    disjunct: int
    witnesses: tuple = ()  # (existential variable, term)
    inert: bool = False  # completed by a disjunct no goal or axiom ever looks at


@dataclass(frozen=True)
class SaturatedBranch:
    root: Condition
    branch: Condition
    path: tuple  # (instance, chosen disjunct) from root to branch
    closure: tuple  # one ClosureEntry per instance at the branch


@dataclass(frozen=True)
class StuckBranch:
    """A closed branch deciding a disjunction or existential with
    non-positive parts: no part is forced there, and the closure admits
    retractions in the site, so no cover can help."""

    root: Condition
    branch: Condition
    path: tuple
    closure: tuple
    refutations: tuple  # (part formula at the branch, countermodel)


@dataclass(frozen=True)
class Refutation:
    morphism: Morphism  # f: D -> C
    term: object = None  # the instance term for a universal
    antecedent: object = None  # Forced verdict for an implication
    consequent: object = None  # countermodel at D


@dataclass(frozen=True)
class ConjunctFailure:
    index: int
    countermodel: object


@dataclass(frozen=True)
class Rewritten:
    rewritten: Formula
    countermodel: object


# ------------------------------------------------------------- helpers


def term_universe(c: Condition, sig: Signature, extra=()) -> tuple:
    """Finite stand-in for Tm(X): the relevant terms plus one foreign term.

    Terms not occurring in the facts or in `extra` all behave alike for
    positive statements, so one representative of them suffices.
    """
    cands = {Var(v) for v in c.vars} | {App(k) for k in sig.constants}
    cands |= c.subterms()
    for t in extra:
        if term_vars(t) <= c.vars:
            cands |= set(subterms(t))
    ordered = sorted(cands, key=term_key)
    foreign = None
    if sig.has_proper_functions and ordered:
        fn, ar = sorted((n, a) for n, a in sig.functions if a > 0)[0]
        depth = max(term_depth(t) for t in ordered) + 1
        t = ordered[0]
        while term_depth(t) < depth or t in cands:
            t = App(fn, (t,) * ar)
        foreign = t
    return ordered, foreign


def _goal_terms(phi: Formula) -> list:
    return sorted(formula_terms(phi), key=term_key)


def _patterns(phi: Formula) -> list:
    """Predicate atoms of `phi` with bound variables turned into wildcards."""
    out = []
    counter = itertools.count()

    def walk(f):
        if isinstance(f, Atom):
            if not f.is_equality:
                out.append(f)
        elif isinstance(f, (And, Or)):
            for p in f.parts:
                walk(p)
        elif isinstance(f, Implies):
            walk(f.ant)
            walk(f.cons)
        elif isinstance(f, (Forall, Exists)):
            walk(replace(f.body, {f.var: Var(f"?{next(counter)}")}))

    walk(phi)
    return out


def _matches(pattern: Atom, atom: Atom, fixed: dict) -> bool:
    if pattern.pred != atom.pred or len(pattern.args) != len(atom.args):
        return False
    s = fixed
    for p, q in zip(pattern.args, atom.args):
        s = match_term(p, q, s)
        if s is None:
            return False
    return True


def _match_atoms(patterns: list, facts: dict, sigma: dict):
    if not patterns:
        yield sigma
        return
    a = patterns[0]
    for b in facts.get((a.pred, len(a.args)), ()):
        s = sigma
        for p, q in zip(a.args, b.args):
            s = match_term(p, q, s)
            if s is None:
                break
        if s is not None:
            yield from _match_atoms(patterns[1:], facts, s)


def _index(atoms) -> dict:
    out: dict = {}
    for b in sorted_atoms(atoms):
        out.setdefault((b.pred, len(b.args)), []).append(b)
    return out


def _inclusion(ext: Condition, c: Condition) -> Morphism:
    return Morphism.make(ext, c, {v: Var(v) for v in c.vars})


def _apply(phi: Formula, m: Morphism) -> Formula:
    return substitute(phi, m.mapping)


def _instance_at(phi: Forall, m: Morphism, t) -> Formula:
    """phi's body under [m, var := t]."""
    sigma = dict(m.mapping)
    sigma[phi.var] = t
    return replace(phi.body, {k: v for k, v in sigma.items() if k in free_vars(phi.body)})


def curry_positive(ant: Formula, cons: Formula, avoid) -> Formula:
    """(psi -> phi) with positive psi as a conjunction of curried universals."""
    avoid = set(avoid) | set(free_vars(cons)) | set(free_vars(ant))
    parts = []
    for vs, atoms in _positive_dnf(ant, avoid):
        body = cons
        for a in reversed(sorted_atoms(atoms)):
            body = Implies(a, body)
        parts.append(forall_many(vs, body))
    return conj(parts)


def _is_compound_positive(f: Formula) -> bool:
    return is_positive(f) and not isinstance(f, (Atom, Top, Bot))


def required_instances(kind: SiteKind, sig: Signature, c: Condition):
    """Terms a universal must be checked at besides the generic element.

    None means no finite set suffices (function symbols outside C_ts).
    """
    if kind == SiteKind.TS or (kind == SiteKind.VS and sig.is_relational()):
        return []
    if sig.has_proper_functions:
        return None
    consts = [App(k) for k in sig.constants]
    if kind == SiteKind.VS:
        return consts
    return [Var(v) for v in sorted(c.vars)] + consts


def eq_solution(kind: SiteKind, c: Condition, s, t) -> Morphism | None:
    """The most general morphism into `c` equating s and t in the site, or None."""
    if kind == SiteKind.RN:
        return identity(c) if s == t else None
    u = mgu([(s, t)])
    if isinstance(u, Failure):
        return None
    m = u.on(c.vars)
    if kind == SiteKind.VS and not all(isinstance(x, Var) for x in m.values()):
        return None
    d = Condition.of(u.codomain_vars(c.vars), (a.subst(m) for a in c.atoms))
    return Morphism.make(d, c, m)


def enumerate_morphisms(c: Condition, kind: SiteKind, sig: Signature, bounds: Bounds):
    """Morphisms f: D -> C with D within the bounds of C, identity first.

    D has the variables used by f plus up to `fresh_vars` new ones, the
    facts forced by f, and up to `atom_budget` extra facts over those
    variables.
    """
    xs = sorted(c.vars)
    count = 0
    yield identity(c)
    count += 1
    preds = sorted(sig.predicates)
    for k in range(bounds.fresh_vars + 1):
        used = set(c.vars)
        new = []
        for _ in range(k):
            n = fresh_name("v", used)
            used.add(n)
            new.append(n)
        space = xs + new
        if kind == SiteKind.TS:
            pool = enumerate_terms(space, sig, bounds.term_depth)
        else:
            pool = [Var(v) for v in space]
        for combo in itertools.product(pool, repeat=len(xs)):
            if kind == SiteKind.RN and len(set(combo)) != len(combo):
                continue
            sigma = dict(zip(xs, combo))
            yvars = set(new)
            for t in combo:
                yvars |= term_vars(t)
            base = {a.subst(sigma) for a in c.atoms}
            ylist = sorted(yvars)
            extra_pool = []
            for p, ar in preds:
                for args in itertools.product(ylist, repeat=ar):
                    a = Atom(p, tuple(Var(v) for v in args))
                    if a not in base:
                        extra_pool.append(a)
            for n_extra in range(bounds.atom_budget + 1):
                for extra in itertools.combinations(extra_pool, n_extra):
                    d = Condition.of(yvars, base | set(extra))
                    m = Morphism.make(d, c, sigma)
                    if k == 0 and n_extra == 0 and m == identity(c):
                        continue
                    yield m
                    count += 1
                    if count >= bounds.max_morphisms:
                        return


# -------------------------------------------------------------- engine


class _Engine:
    def __init__(self, kind: SiteKind, theory: Theory, bounds: Bounds, forall_shortcut: bool = True):
        check_equality_free(theory)
        self.kind = kind
        self.theory = theory
        self.sig = theory.signature
        self.bounds = bounds
        self.shortcut = forall_shortcut
        self.memo: dict = {}
        self.ante_patterns = [a for ax in theory.axioms for a in ax.antecedent]

    # ---- entry

    def force(self, c: Condition, phi: Formula):
        key = (c, phi)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        v = self._force(c, phi)
        self.memo[key] = v
        return v

    def _force(self, c, phi):
        if isinstance(phi, Top):
            return Forced(TopW())
        if is_positive(phi):
            return self.saturate(c, phi)
        if isinstance(phi, And):
            unknown = None
            parts = []
            for i, p in enumerate(phi.parts):
                v = self.force(c, p)
                if isinstance(v, NotForced):
                    return NotForced(ConjunctFailure(i, v.countermodel))
                if isinstance(v, Unknown):
                    unknown = unknown or v
                    continue
                parts.append(v.witness)
            return unknown or Forced(AndW(tuple(parts)))
        if isinstance(phi, Implies):
            return self._implies(c, phi)
        if isinstance(phi, Forall):
            return self._forall(c, phi)
        return self._mixed(c, phi)

    # ---- chase machinery

    def _pool(self, S, goal):
        cands, foreign = term_universe(S, self.sig, _goal_terms(goal))
        return cands + ([foreign] if foreign is not None else []), cands, foreign

    def _instances(self, S, goal):
        pool, _, _ = self._pool(S, goal)
        return axiom_instances(S, self.theory, self.kind, pool=pool)

    def _satisfying(self, inst: AxiomInstance, S: Condition, cands, accept=None):
        facts = _index(S.atoms)
        for i, (ex, atoms) in enumerate(inst.axiom.disjuncts):
            for w in _match_atoms(sorted_atoms(atoms), facts, dict(inst.sigma)):
                missing = [v for v in ex if v not in w]
                if missing and not cands:
                    continue
                wit = tuple((v, w.get(v, cands[0] if cands else None)) for v in ex)
                if accept is None or accept(i, wit):
                    return i, wit
        return None

    def _relevant(self, atom: Atom, patterns, fixed, foreign) -> bool:
        if foreign is not None and any(foreign in set(subterms(t)) for t in atom.args):
            return True
        if any(_matches(p, atom, fixed) for p in patterns):
            return True
        return any(_matches(p, atom, {}) for p in self.ante_patterns)

    def _inert(self, inst: AxiomInstance, patterns, fixed, foreign):
        """Index of a witness-free disjunct, if every disjunct is irrelevant."""
        choice = None
        for i, (ext, _, _) in enumerate(inst.extensions):
            new = ext.atoms - inst.target.atoms
            if any(self._relevant(a, patterns, fixed, foreign) for a in new):
                return None
            if choice is None and not inst.axiom.disjuncts[i][0]:
                choice = i
        return choice

    def _closure(self, S, goal, prune, accept=None):
        """Closure entries at S, or None if some instance is still open."""
        pool, cands, foreign = self._pool(S, goal)
        patterns = _patterns(goal)
        fixed = {v: Var(v) for v in free_vars(goal)}
        entries = []
        for inst in axiom_instances(S, self.theory, self.kind, pool=pool):
            sat = self._satisfying(inst, S, cands, accept)
            if sat is not None:
                entries.append(ClosureEntry(inst, sat[0], sat[1]))
                continue
            if prune:
                i = self._inert(inst, patterns, fixed, foreign)
                if i is not None:
                    entries.append(ClosureEntry(inst, i, (), True))
                    continue
            return None
        return tuple(entries)

    def _open_instances(self, S, goal, prune):
        pool, cands, foreign = self._pool(S, goal)
        patterns = _patterns(goal)
        fixed = {v: Var(v) for v in free_vars(goal)}
        out = []
        for inst in axiom_instances(S, self.theory, self.kind, pool=pool):
            if self._satisfying(inst, S, cands) is not None:
                continue
            if prune and self._inert(inst, patterns, fixed, foreign) is not None:
                continue
            out.append(inst)
        return out

    def _chase(self, c, goal, leaf, prune, stuck):
        b = self.bounds

        def expand(S, queue, rounds, fresh, path):
            w = leaf(S)
            if w is not None:
                return ("F", trivial(S), [w])
            _, cands, _ = self._pool(S, goal)
            queue = [
                q
                for q in (AxiomInstance(i.axiom, i.index, S, i.inst) for i in queue)
                if self._satisfying(q, S, cands) is None
            ]
            if not queue:
                queue = self._open_instances(S, goal, prune)
                if not queue:
                    return stuck(S, path)
                if rounds == 0:
                    return ("U", f"cover_depth {b.cover_depth} exhausted")
                rounds -= 1
            inst, rest = queue[0], queue[1:]
            kids, legs, unknown = [], [], None
            for i, (ext, _, ren) in enumerate(inst.extensions):
                if fresh + len(ren) > b.fresh_vars:
                    unknown = f"fresh_vars {b.fresh_vars} exhausted"
                    continue
                r = expand(ext, rest, rounds, fresh + len(ren), path + ((inst, i),))
                if r[0] == "N":
                    return r
                if r[0] == "U":
                    unknown = r[1]
                    continue
                kids.append(r[1])
                legs.extend(r[2])
            if unknown:
                return ("U", unknown)
            return ("F", AxiomStep(S, inst, tuple(kids)), legs)

        r = expand(c, [], b.cover_depth, 0, ())
        if r[0] == "F":
            return Forced(assemble(goal, r[1], r[2]))
        if r[0] == "N":
            return NotForced(r[1])
        return Unknown(r[1])

    # ---- positive goals

    def direct(self, S: Condition, phi: Formula):
        """Witness with identity covers if `phi` holds outright in S."""
        if isinstance(phi, Top):
            return TopW()
        if isinstance(phi, Bot):
            return None
        if isinstance(phi, Atom):
            if phi.is_equality:
                return EqW(trivial(S)) if phi.args[0] == phi.args[1] else None
            return FactW(trivial(S)) if phi in S.atoms else None
        if isinstance(phi, And):
            parts = []
            for p in phi.parts:
                w = self.direct(S, p)
                if w is None:
                    return None
                parts.append(w)
            return AndW(tuple(parts))
        if isinstance(phi, Or):
            for i, p in enumerate(phi.parts):
                w = self.direct(S, p)
                if w is not None:
                    return OrW(trivial(S), ((i, w),))
            return None
        if isinstance(phi, Exists):
            cands, foreign = term_universe(S, self.sig, _goal_terms(phi))
            for t in cands + ([foreign] if foreign is not None else []):
                w = self.direct(S, replace(phi.body, {phi.var: t}))
                if w is not None:
                    return ExistsW(trivial(S), ((t, w),))
            return None
        raise ForcingError(f"not a positive formula: {phi}")

    def saturate(self, c, goal):
        def stuck(S, path):
            closure = self._closure(S, goal, prune=True)
            if closure is None:  # cannot happen: no open instance remained
                return ("U", "closure check failed")
            return ("N", SaturatedBranch(c, S, path, closure))

        return self._chase(c, goal, lambda S: self.direct(S, goal), True, stuck)

    # ---- disjunctions / existentials with negative parts

    def _retraction_ok(self, i, wit, inst):
        if self.kind == SiteKind.TS:
            return True
        if self.kind == SiteKind.VS:
            return all(isinstance(t, Var) for _, t in wit)
        return not wit

    def _mixed(self, c, phi):
        if isinstance(phi, Or):
            def leaf(S):
                for i, p in enumerate(phi.parts):
                    v = self.force(S, p)
                    if isinstance(v, Forced):
                        return OrW(trivial(S), ((i, v.witness),))
                return None

            def parts_at(S):
                return list(phi.parts)
        elif isinstance(phi, Exists):
            def leaf(S):
                cands, foreign = term_universe(S, self.sig, _goal_terms(phi))
                for t in cands + ([foreign] if foreign is not None else []):
                    v = self.force(S, replace(phi.body, {phi.var: t}))
                    if isinstance(v, Forced):
                        return ExistsW(trivial(S), ((t, v.witness),))
                return None

            def parts_at(S):
                if self.sig.has_proper_functions:
                    return None
                terms = [Var(v) for v in sorted(S.vars)] + [App(k) for k in self.sig.constants]
                return [replace(phi.body, {phi.var: t}) for t in terms]
        else:
            raise ForcingError(f"unexpected formula {phi}")

        def stuck(S, path):
            parts = parts_at(S)
            if parts is None:
                return ("U", "existential over a signature with function symbols")
            closure = self._closure(S, phi, prune=False, accept=lambda i, w: self._retraction_ok(i, w, None))
            if closure is None:
                return ("U", "closed branch admits no retraction in this site")
            refs = []
            for p in parts:
                v = self.force(S, p)
                if not isinstance(v, NotForced):
                    return ("U", f"part {p} undecided at a closed branch")
                refs.append((p, v.countermodel))
            return ("N", StuckBranch(c, S, path, closure, tuple(refs)))

        return self._chase(c, phi, leaf, False, stuck)

    # ---- implication

    def _implies(self, c, phi):
        ant, cons = phi.ant, phi.cons
        if isinstance(ant, Top):
            v = self.force(c, cons)
            if isinstance(v, Forced):
                return Forced(ImpliesW("top", v.witness))
            if isinstance(v, NotForced):
                return NotForced(Refutation(identity(c), None, Forced(TopW()), v.countermodel))
            return v
        if isinstance(ant, Bot):
            return Forced(ImpliesW("bot"))
        if isinstance(ant, Atom) and not ant.is_equality:
            ext = c.extend(atoms=[ant])
            v = self.force(ext, cons)
            if isinstance(v, Forced):
                return Forced(ImpliesW("atom", v.witness, antecedent=ant))
            if isinstance(v, NotForced):
                return NotForced(
                    Refutation(_inclusion(ext, c), None, Forced(FactW(trivial(ext))), v.countermodel)
                )
            return v
        if isinstance(ant, Atom):
            return self._eq_implies(c, ant, cons)
        if _is_compound_positive(ant):
            rw = curry_positive(ant, cons, c.vars)
            v = self.force(c, rw)
            if isinstance(v, Forced):
                return Forced(ImpliesW("dnf", v.witness, rewritten=rw))
            if isinstance(v, NotForced):
                return NotForced(Rewritten(rw, v.countermodel))
            return v
        v = self.force(c, cons)
        if isinstance(v, Forced):
            return Forced(ImpliesW("cons", v.witness))
        tried = 0
        for f in enumerate_morphisms(c, self.kind, self.sig, self.bounds):
            tried += 1
            a = self.force(f.dom, _apply(ant, f))
            if not isinstance(a, Forced):
                continue
            b = self.force(f.dom, _apply(cons, f))
            if isinstance(b, NotForced):
                return NotForced(Refutation(f, None, a, b.countermodel))
        return Unknown(f"implication with compound antecedent: no refutation among {tried} morphisms")

    def _eq_implies(self, c, ant, cons):
        s, t = ant.args
        mu = eq_solution(self.kind, c, s, t)
        if mu is None:
            return Forced(ImpliesW("eq-vacuous", antecedent=ant))
        v = self.force(mu.dom, _apply(cons, mu))
        if isinstance(v, Forced):
            return Forced(ImpliesW("eq", v.witness, antecedent=ant, morphism=mu))
        if isinstance(v, NotForced):
            return NotForced(Refutation(mu, None, Forced(EqW(trivial(mu.dom))), v.countermodel))
        return v

    # ---- universal

    def _forall(self, c, phi):
        if not self.shortcut:
            return self._forall_enum(c, phi)
        x = fresh_name(phi.var, c.vars)
        ext = c.extend(vars=[x])
        e = _inclusion(ext, c)
        v = self.force(ext, _instance_at(phi, e, Var(x)))
        if isinstance(v, NotForced):
            return NotForced(Refutation(e, Var(x), None, v.countermodel))
        unknown = v if isinstance(v, Unknown) else None
        req = required_instances(self.kind, self.sig, c)
        if req is None:
            return self._forall_shapes(c, phi, unknown)
        insts = []
        idc = identity(c)
        for u in req:
            w = self.force(c, _instance_at(phi, idc, u))
            if isinstance(w, NotForced):
                return NotForced(Refutation(idc, u, None, w.countermodel))
            if isinstance(w, Unknown):
                unknown = unknown or w
                continue
            insts.append((u, w.witness))
        if unknown:
            return unknown
        return Forced(ForallW(x, v.witness, tuple(insts)))

    def _forall_shapes(self, c, phi, unknown):
        """Universal outside C_ts with function symbols: try term shapes."""
        used = set(c.vars)
        zs = []
        for _ in range(max(1, self.bounds.fresh_vars)):
            z = fresh_name("z", used)
            used.add(z)
            zs.append(z)
        n = 0
        for u in enumerate_terms(sorted(c.vars) + zs, self.sig, self.bounds.term_depth):
            d = c.extend(vars=term_vars(u) - c.vars)
            e = _inclusion(d, c)
            v = self.force(d, _instance_at(phi, e, u))
            n += 1
            if isinstance(v, NotForced):
                return NotForced(Refutation(e, u, None, v.countermodel))
        return Unknown(f"universal over function symbols: {n} instance shapes hold, no finite check suffices")

    def _forall_enum(self, c, phi):
        """Clause 7 by enumeration: every f: D -> C and t in Tm(D)."""
        x = fresh_name(phi.var, c.vars)
        ext = c.extend(vars=[x])
        e = _inclusion(ext, c)
        entries = []
        unknown = None
        todo = [(e, Var(x))]
        for f in enumerate_morphisms(c, self.kind, self.sig, self.bounds):
            for t in enumerate_terms(sorted(f.dom.vars), self.sig, self.bounds.term_depth):
                todo.append((f, t))
        seen = set()
        for f, t in todo:
            key = (f.dom, f.subst, t)
            if key in seen:
                continue
            seen.add(key)
            v = self.force(f.dom, _instance_at(phi, f, t))
            if isinstance(v, NotForced):
                return NotForced(Refutation(f, t, None, v.countermodel))
            if isinstance(v, Unknown):
                unknown = unknown or v
                continue
            entries.append((f, t, v.witness))
        if unknown:
            return unknown
        w = ForallEnumW(x, tuple(entries))
        if required_instances(self.kind, self.sig, c) is None:
            return Unknown("enumeration cannot certify a universal over function symbols in this site")
        return Forced(w)


# ------------------------------------------------------------ assembly


def assemble(phi: Formula, deriv: Derivation, legs: list):
    """Local character: witnesses at the legs of `deriv` give one at its root."""
    if isinstance(deriv, IsoBase) and len(legs) == 1 and deriv.iso == identity(deriv.root):
        return legs[0]
    if isinstance(phi, Top):
        return TopW()
    if isinstance(phi, And):
        return AndW(tuple(assemble(p, deriv, [w.parts[k] for w in legs]) for k, p in enumerate(phi.parts)))
    subs = [w.deriv for w in legs]
    combined = graft(deriv, subs)
    if isinstance(phi, Atom):
        return (EqW if phi.is_equality else FactW)(combined)
    if isinstance(phi, Bot):
        return BotW(combined)
    if isinstance(phi, Or):
        return OrW(combined, tuple(l for w in legs for l in w.legs))
    if isinstance(phi, Exists):
        return ExistsW(combined, tuple(l for w in legs for l in w.legs))
    raise ForcingError(f"cannot assemble leg witnesses for {phi}")


# -------------------------------------------------------------- public


def _validate(c: Condition, phi: Formula, theory: Theory):
    extra = free_vars(phi) - c.vars
    if extra:
        raise ForcingError(f"free variables {sorted(extra)} not in the condition")
    try:
        theory.signature.check_formula(phi)
        for a in c.atoms:
            theory.signature.check_atom(a)
    except SyntaxError_ as exc:
        raise ForcingError(str(exc)) from None


def force(
    kind: SiteKind,
    c: Condition,
    phi: Formula,
    theory: Theory,
    bounds: Bounds | None = None,
    *,
    forall_shortcut: bool = True,
):
    """Decide ``c ⊩ phi`` in the given site, within `bounds`."""
    _validate(c, phi, theory)
    return _Engine(kind, theory, bounds or Bounds(), forall_shortcut).force(c, phi)


def saturate_positive(kind: SiteKind, c: Condition, goal: Formula, theory: Theory, bounds: Bounds | None = None):
    if not is_positive(goal):
        raise ForcingError(f"not a positive formula: {goal}")
    _validate(c, goal, theory)
    return _Engine(kind, theory, bounds or Bounds()).saturate(c, goal)


# ----------------------------------------------------------- transport


def transport_witness(w, g: Morphism, kind: SiteKind = SiteKind.TS):
    """Monotonicity: a witness at C for phi becomes one at g.dom for phi g."""
    if isinstance(w, TopW):
        return w
    if isinstance(w, (FactW, EqW, BotW)):
        return type(w)(pullback_cover(w.deriv, g))
    if isinstance(w, (OrW, ExistsW)):
        v, maps = pullback_cover_maps(w.deriv, g)
        legs = []
        for i, m in maps:
            tag, sub = w.legs[i]
            if isinstance(w, ExistsW):
                tag = subst_term(tag, m.mapping)
            legs.append((tag, transport_witness(sub, m, kind)))
        return type(w)(v, tuple(legs))
    if isinstance(w, AndW):
        return AndW(tuple(transport_witness(p, g, kind) for p in w.parts))
    if isinstance(w, ImpliesW):
        return _transport_implies(w, g, kind)
    if isinstance(w, ForallEnumW):
        generic = next(
            (ent for ent in w.entries if ent[1] == Var(w.var) and ent[0].dom.vars == ent[0].cod.vars | {w.var}),
            None,
        )
        if generic is None:
            raise ForcingError("enumeration witness lacks its generic entry")
        insts = tuple((t, sub) for f, t, sub in w.entries if f == identity(f.cod) and term_depth(t) == 0)
        return transport_witness(ForallW(w.var, generic[2], insts), g, kind)
    if isinstance(w, ForallW):
        return _transport_forall(w, g, kind)
    raise ForcingError(f"unknown witness {w!r}")


def _transport_implies(w: ImpliesW, g: Morphism, kind):
    m = g.mapping
    if w.mode in ("bot",):
        return w
    if w.mode in ("top", "cons"):
        return dc_replace(w, sub=transport_witness(w.sub, g, kind))
    if w.mode == "atom":
        a2 = w.antecedent.subst(m)
        ga = Morphism.make(g.dom.extend(atoms=[a2]), g.cod.extend(atoms=[w.antecedent]), m)
        return ImpliesW("atom", transport_witness(w.sub, ga, kind), antecedent=a2)
    if w.mode == "eq-vacuous":
        return ImpliesW("eq-vacuous", antecedent=w.antecedent.subst(m))
    if w.mode == "eq":
        a2 = w.antecedent.subst(m)
        s, t = a2.args
        mu2 = eq_solution(kind, g.dom, s, t)
        if mu2 is None:
            return ImpliesW("eq-vacuous", antecedent=a2)
        h = factor_through(compose(g, mu2), w.morphism, kind)
        if h is None:
            raise ForcingError("unifier does not factor; not a most general one")
        return ImpliesW("eq", transport_witness(w.sub, h, kind), antecedent=a2, morphism=mu2)
    if w.mode == "dnf":
        return ImpliesW("dnf", transport_witness(w.sub, g, kind), rewritten=substitute(w.rewritten, m))
    raise ForcingError(f"unknown implication mode {w.mode}")


def _transport_forall(w: ForallW, g: Morphism, kind):
    D, C = g.dom, g.cod
    x2 = fresh_name(w.var, D.vars)
    sigma = dict(g.mapping)
    sigma[w.var] = Var(x2)
    gx = Morphism.make(D.extend(vars=[x2]), C.extend(vars=[w.var]), sigma)
    generic = transport_witness(w.generic, gx, kind)
    by_term = dict(w.instances)
    insts = []
    if kind == SiteKind.RN:
        # y = g(u) reuses the instance at u; other y come from the generic element
        preimage = {t: x for x, t in g.subst}
        for y in sorted(D.vars):
            if Var(y) in preimage:
                insts.append((Var(y), transport_witness(by_term[Var(preimage[Var(y)])], g, kind)))
            else:
                s2 = dict(g.mapping)
                s2[w.var] = Var(y)
                gy = Morphism.make(D, C.extend(vars=[w.var]), s2)
                insts.append((Var(y), transport_witness(w.generic, gy, kind)))
    insts += [(u, transport_witness(sub, g, kind)) for u, sub in w.instances if isinstance(u, App)]
    return ForallW(x2, generic, tuple(insts))


# ------------------------------------------------------------- checking


class _Checker:
    def __init__(self, kind, theory):
        self.kind = kind
        self.theory = theory
        self.sig = theory.signature
        self.eng = _Engine(kind, theory, Bounds())

    def _deriv(self, d, c):
        return isinstance(d, Derivation) and d.root == c and check_derivation(d, self.theory, self.kind)

    def _term_ok(self, t, c):
        try:
            self.sig.check_term(t, c.vars)
        except SyntaxError_:
            return False
        return True

    def witness(self, c, phi, w) -> bool:
        try:
            return self._witness(c, phi, w)
        except (MorphismError, ForcingError, ValueError, AttributeError, TypeError, IndexError, KeyError):
            return False

    def _witness(self, c, phi, w) -> bool:
        if isinstance(w, TopW):
            return isinstance(phi, Top) or (isinstance(phi, And) and not phi.parts)
        if isinstance(w, FactW):
            if not (isinstance(phi, Atom) and not phi.is_equality and self._deriv(w.deriv, c)):
                return False
            return all(_apply(phi, f) in f.dom.atoms for f in w.deriv.leaves())
        if isinstance(w, EqW):
            if not (isinstance(phi, Atom) and phi.is_equality and self._deriv(w.deriv, c)):
                return False
            s, t = phi.args
            return all(subst_term(s, f.mapping) == subst_term(t, f.mapping) for f in w.deriv.leaves())
        if isinstance(w, BotW):
            return isinstance(phi, Bot) and self._deriv(w.deriv, c) and not w.deriv.leaves()
        if isinstance(w, OrW):
            if not (isinstance(phi, Or) and self._deriv(w.deriv, c)):
                return False
            leaves = w.deriv.leaves()
            if len(leaves) != len(w.legs):
                return False
            for f, (i, sub) in zip(leaves, w.legs):
                if not (0 <= i < len(phi.parts)) or not self._witness(f.dom, _apply(phi.parts[i], f), sub):
                    return False
            return True
        if isinstance(w, ExistsW):
            if not (isinstance(phi, Exists) and self._deriv(w.deriv, c)):
                return False
            leaves = w.deriv.leaves()
            if len(leaves) != len(w.legs):
                return False
            for f, (t, sub) in zip(leaves, w.legs):
                if not self._term_ok(t, f.dom):
                    return False
                if not self._witness(f.dom, _instance_at(phi, f, t), sub):
                    return False
            return True
        if isinstance(w, AndW):
            return (
                isinstance(phi, And)
                and len(phi.parts) == len(w.parts)
                and all(self._witness(c, p, s) for p, s in zip(phi.parts, w.parts))
            )
        if isinstance(w, ImpliesW):
            return isinstance(phi, Implies) and self._implies(c, phi, w)
        if isinstance(w, ForallW):
            if not isinstance(phi, Forall) or w.var in c.vars:
                return False
            ext = c.extend(vars=[w.var])
            if not self._witness(ext, _instance_at(phi, _inclusion(ext, c), Var(w.var)), w.generic):
                return False
            req = required_instances(self.kind, self.sig, c)
            if req is None or [u for u, _ in w.instances] != req:
                return False
            idc = identity(c)
            return all(self._witness(c, _instance_at(phi, idc, u), sub) for u, sub in w.instances)
        if isinstance(w, ForallEnumW):
            if not isinstance(phi, Forall) or w.var in c.vars:
                return False
            req = required_instances(self.kind, self.sig, c)
            if req is None:
                return False
            have = set()
            for f, t, sub in w.entries:
                if f.cod != c or not f.in_site(self.kind) or not self._term_ok(t, f.dom):
                    return False
                if not self._witness(f.dom, _instance_at(phi, f, t), sub):
                    return False
                if t == Var(w.var) and f.dom == c.extend(vars=[w.var]) and f == _inclusion(f.dom, c):
                    have.add("generic")
                if f == identity(c):
                    have.add(t)
            return "generic" in have and all(u in have for u in req)
        return False

    def _implies(self, c, phi, w) -> bool:
        ant, cons = phi.ant, phi.cons
        if w.mode == "top":
            return isinstance(ant, Top) and self._witness(c, cons, w.sub)
        if w.mode == "bot":
            return isinstance(ant, Bot)
        if w.mode == "atom":
            if not (isinstance(ant, Atom) and not ant.is_equality and w.antecedent == ant):
                return False
            return self._witness(c.extend(atoms=[ant]), cons, w.sub)
        if w.mode in ("eq", "eq-vacuous"):
            if not (isinstance(ant, Atom) and ant.is_equality):
                return False
            mu = eq_solution(self.kind, c, *ant.args)
            if w.mode == "eq-vacuous":
                return mu is None
            if mu is None or w.morphism != mu:
                return False
            return self._witness(mu.dom, _apply(cons, mu), w.sub)
        if w.mode == "dnf":
            if not _is_compound_positive(ant) or w.rewritten is None:
                return False
            if w.rewritten != curry_positive(ant, cons, c.vars):
                return False
            return self._witness(c, w.rewritten, w.sub)
        if w.mode == "cons":
            return self._witness(c, cons, w.sub)
        return False

    # ---- countermodels

    def countermodel(self, c, phi, cm) -> bool:
        try:
            return self._cm(c, phi, cm)
        except (MorphismError, ForcingError, ValueError, AttributeError, TypeError, IndexError, KeyError):
            return False

    def _replay(self, c, path, branch) -> bool:
        cur = c
        for inst, i in path:
            if inst.target != cur or not inst.applicable():
                return False
            if self.theory.axioms[inst.index] != inst.axiom:
                return False
            cur = inst.extensions[i][0]
        return cur == branch

    def _closure_ok(self, S, goal, closure, allow_inert, accept=None) -> bool:
        pool, cands, foreign = self.eng._pool(S, goal)
        expected = {(i.index, i.inst) for i in axiom_instances(S, self.theory, self.kind, pool=pool)}
        got = {(e.instance.index, e.instance.inst) for e in closure}
        if expected != got or len(closure) != len(got):
            return False
        patterns = _patterns(goal)
        fixed = {v: Var(v) for v in free_vars(goal)}
        for e in closure:
            inst = e.instance
            if inst.target != S or self.theory.axioms[inst.index] != inst.axiom:
                return False
            if e.inert:
                if not allow_inert:
                    return False
                if inst.axiom.disjuncts[e.disjunct][0]:
                    return False
                if self.eng._inert(inst, patterns, fixed, foreign) is None:
                    return False
                continue
            ex = inst.axiom.disjuncts[e.disjunct][0]
            wit = dict(e.witnesses)
            if set(wit) != set(ex) or not all(self._term_ok(t, S) for t in wit.values()):
                return False
            if not inst.disjunct_atoms(e.disjunct, wit) <= S.atoms:
                return False
            if accept is not None and not accept(e.disjunct, e.witnesses, inst):
                return False
        return True

    def _cm(self, c, phi, cm) -> bool:
        if isinstance(cm, SaturatedBranch):
            if not is_positive(phi) or cm.root != c or not self._replay(c, cm.path, cm.branch):
                return False
            if not self._closure_ok(cm.branch, phi, cm.closure, True):
                return False
            return self.eng.direct(cm.branch, phi) is None
        if isinstance(cm, StuckBranch):
            if not isinstance(phi, (Or, Exists)) or cm.root != c or not self._replay(c, cm.path, cm.branch):
                return False
            S = cm.branch
            if not self._closure_ok(S, phi, cm.closure, False, self.eng._retraction_ok):
                return False
            if isinstance(phi, Or):
                parts = list(phi.parts)
            else:
                if self.sig.has_proper_functions:
                    return False
                terms = [Var(v) for v in sorted(S.vars)] + [App(k) for k in self.sig.constants]
                parts = [replace(phi.body, {phi.var: t}) for t in terms]
            if len(parts) != len(cm.refutations):
                return False
            return all(p == q and self._cm(S, p, sub) for p, (q, sub) in zip(parts, cm.refutations))
        if isinstance(cm, ConjunctFailure):
            return isinstance(phi, And) and 0 <= cm.index < len(phi.parts) and self._cm(c, phi.parts[cm.index], cm.countermodel)
        if isinstance(cm, Rewritten):
            if not (isinstance(phi, Implies) and _is_compound_positive(phi.ant)):
                return False
            if cm.rewritten != curry_positive(phi.ant, phi.cons, c.vars):
                return False
            return self._cm(c, cm.rewritten, cm.countermodel)
        if isinstance(cm, Refutation):
            f = cm.morphism
            if f.cod != c or not f.in_site(self.kind):
                return False
            if isinstance(phi, Forall):
                if cm.term is None or not self._term_ok(cm.term, f.dom):
                    return False
                return self._cm(f.dom, _instance_at(phi, f, cm.term), cm.consequent)
            if isinstance(phi, Implies):
                a = cm.antecedent
                if not isinstance(a, Forced) or not self._witness(f.dom, _apply(phi.ant, f), a.witness):
                    return False
                return self._cm(f.dom, _apply(phi.cons, f), cm.consequent)
            return False
        return False


def check_witness(kind: SiteKind, c: Condition, phi: Formula, theory: Theory, w) -> bool:
    """Replay a forcing witness; never searches for covers or terms."""
    return _Checker(kind, theory).witness(c, phi, w)


def check_countermodel(kind: SiteKind, c: Condition, phi: Formula, theory: Theory, cm) -> bool:
    return _Checker(kind, theory).countermodel(c, phi, cm)


def check_verdict(kind: SiteKind, c: Condition, phi: Formula, theory: Theory, v) -> bool:
    if isinstance(v, Forced):
        return check_witness(kind, c, phi, theory, v.witness)
    if isinstance(v, NotForced):
        return check_countermodel(kind, c, phi, theory, v.countermodel)
    return isinstance(v, Unknown)


__all__ = [
    "Bounds",
    "Forced",
    "NotForced",
    "Unknown",
    "TopW",
    "FactW",
    "EqW",
    "BotW",
    "OrW",
    "ExistsW",
    "AndW",
    "ImpliesW",
    "ForallW",
    "ForallEnumW",
    "ClosureEntry",
    "SaturatedBranch",
    "StuckBranch",
    "Refutation",
    "ConjunctFailure",
    "Rewritten",
    "assemble",
    "check_countermodel",
    "check_verdict",
    "check_witness",
    "curry_positive",
    "enumerate_morphisms",
    "eq_solution",
    "force",
    "required_instances",
    "saturate_positive",
    "term_universe",
    "transport_witness",
]
