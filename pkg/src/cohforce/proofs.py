"""Natural deduction with explicit variable contexts, and proof extraction.

A node proves ``hyps ⊢_ctx concl``.  Weakening is implicit: a premise may
use any subset of its node's hypotheses (plus whatever the rule
discharges).  Contexts only change at the binders ``all_i`` and ``ex_e``,
so the checker tracks exactly which terms are available; this matters
because domains may be empty.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .coverage import AxiomStep, Derivation, IsoBase
from .forcing import (
    AndW,
    Bounds,
    BotW,
    EqW,
    ExistsW,
    FactW,
    Forced,
    ForallEnumW,
    ForallW,
    ImpliesW,
    NotForced,
    OrW,
    TopW,
    _instance_at,
    check_witness,
    force,
)
from .sites import Condition, SiteKind, iso_inverse
from .syntax import (
    BOT,
    And,
    Atom,
    Bot,
    Exists,
    Forall,
    Formula,
    Implies,
    Or,
    SyntaxError_,
    Theory,
    Top,
    Var,
    free_vars,
    fresh_name,
    is_generalized_geometric,
    replace,
    subst_term,
    substitute,
    term_vars,
)


class ProofError(ValueError):
    pass


RULES = (
    "hyp", "top_i", "bot_e", "and_i", "and_e", "or_i", "or_e",
    "imp_i", "imp_e", "all_i", "all_e", "ex_i", "ex_e", "axiom", "refl",
)


@dataclass(frozen=True)
class Sequent:
    ctx: frozenset
    hyps: tuple
    concl: Formula

    def __post_init__(self):
        object.__setattr__(self, "ctx", frozenset(self.ctx))
        object.__setattr__(self, "hyps", tuple(self.hyps))
        loose = set(free_vars(self.concl))
        for h in self.hyps:
            loose |= free_vars(h)
        if not loose <= self.ctx:
            raise ProofError(f"free variables {sorted(loose - self.ctx)} outside the context")

    def __str__(self) -> str:
        hs = ", ".join(map(str, self.hyps))
        return f"{hs} |-[{','.join(sorted(self.ctx))}] {self.concl}"


@dataclass(frozen=True)
class ProofTree:
    rule: str
    ctx: frozenset
    hyps: frozenset
    concl: Formula
    premises: tuple = ()
    data: tuple = ()  # disjunct/conjunct index, term, eigenvariable or axiom index

    def size(self) -> int:
        return 1 + sum(p.size() for p in self.premises)

    def height(self) -> int:
        return 1 + max((p.height() for p in self.premises), default=0)

    def nodes(self):
        yield self
        for p in self.premises:
            yield from p.nodes()


def _node(rule, ctx, hyps, concl, premises=(), data=()):
    return ProofTree(rule, frozenset(ctx), frozenset(hyps), concl, tuple(premises), tuple(data))


# ------------------------------------------------------------ checking


class CheckResult(NamedTuple):
    ok: bool
    path: tuple = ()  # premise indices from the root to the failing node
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


class _Fail(Exception):
    def __init__(self, path, reason):
        self.path = path
        self.reason = reason


def check_proof(p: ProofTree, s: Sequent, theory: Theory) -> CheckResult:
    """Validate every node; on failure report the first bad node."""
    try:
        if p.ctx != s.ctx:
            raise _Fail((), "root context differs from the sequent")
        if not p.hyps <= set(s.hyps):
            raise _Fail((), "root uses hypotheses outside the sequent")
        if p.concl != s.concl:
            raise _Fail((), "root conclusion differs from the sequent")
        _check(p, theory, ())
    except _Fail as f:
        return CheckResult(False, f.path, f.reason)
    return CheckResult(True)


def _check(p: ProofTree, theory: Theory, path):
    def fail(msg):
        raise _Fail(path, f"{p.rule}: {msg}")

    sig = theory.signature
    if p.rule not in RULES:
        fail("unknown rule")
    loose = set(free_vars(p.concl))
    for h in p.hyps:
        loose |= free_vars(h)
    if not loose <= p.ctx:
        fail(f"free variables {sorted(loose - p.ctx)} outside the context")
    try:
        sig.check_formula(p.concl)
    except SyntaxError_ as exc:
        fail(str(exc))

    prem = p.premises
    r = p.rule

    def arity(n):
        if len(prem) != n:
            fail(f"expected {n} premises, got {len(prem)}")

    def same_ctx(q):
        if q.ctx != p.ctx:
            fail("premise context differs")

    def hyps_within(q, extra=()):
        if not q.hyps <= p.hyps | set(extra):
            fail("premise uses undischarged hypotheses")

    def term_ok(t, ctx):
        try:
            sig.check_term(t, ctx)
        except SyntaxError_ as exc:
            fail(f"term {t}: {exc}")

    if r == "hyp":
        arity(0)
        if p.concl not in p.hyps:
            fail("conclusion is not a hypothesis")
    elif r == "top_i":
        arity(0)
        if not isinstance(p.concl, Top):
            fail("conclusion is not true")
    elif r == "refl":
        arity(0)
        c = p.concl
        if not sig.with_equality:
            fail("signature has no equality")
        if not (isinstance(c, Atom) and c.is_equality and c.args[0] == c.args[1]):
            fail("conclusion is not t = t")
    elif r == "axiom":
        arity(0)
        if len(p.data) != 1 or not (0 <= p.data[0] < len(theory.axioms)):
            fail("bad axiom index")
        if p.concl != theory.axioms[p.data[0]].to_formula():
            fail("conclusion is not the axiom")
    elif r == "bot_e":
        arity(1)
        same_ctx(prem[0])
        hyps_within(prem[0])
        if not isinstance(prem[0].concl, Bot):
            fail("premise does not prove false")
    elif r == "and_i":
        if not isinstance(p.concl, And):
            fail("conclusion is not a conjunction")
        arity(len(p.concl.parts))
        for q, part in zip(prem, p.concl.parts):
            same_ctx(q)
            hyps_within(q)
            if q.concl != part:
                fail("premise does not match conjunct")
    elif r == "and_e":
        arity(1)
        q = prem[0]
        same_ctx(q)
        hyps_within(q)
        if not isinstance(q.concl, And) or len(p.data) != 1:
            fail("premise is not a conjunction")
        i = p.data[0]
        if not (0 <= i < len(q.concl.parts)) or q.concl.parts[i] != p.concl:
            fail("conclusion is not the selected conjunct")
    elif r == "or_i":
        arity(1)
        q = prem[0]
        same_ctx(q)
        hyps_within(q)
        if not isinstance(p.concl, Or) or len(p.data) != 1:
            fail("conclusion is not a disjunction")
        i = p.data[0]
        if not (0 <= i < len(p.concl.parts)) or p.concl.parts[i] != q.concl:
            fail("premise is not the selected disjunct")
    elif r == "or_e":
        if not prem or not isinstance(prem[0].concl, Or):
            fail("major premise is not a disjunction")
        parts = prem[0].concl.parts
        arity(len(parts) + 1)
        same_ctx(prem[0])
        hyps_within(prem[0])
        for q, part in zip(prem[1:], parts):
            same_ctx(q)
            hyps_within(q, [part])
            if q.concl != p.concl:
                fail("case does not prove the conclusion")
    elif r == "imp_i":
        arity(1)
        q = prem[0]
        same_ctx(q)
        if not isinstance(p.concl, Implies):
            fail("conclusion is not an implication")
        hyps_within(q, [p.concl.ant])
        if q.concl != p.concl.cons:
            fail("premise does not prove the consequent")
    elif r == "imp_e":
        arity(2)
        for q in prem:
            same_ctx(q)
            hyps_within(q)
        f = prem[0].concl
        if not isinstance(f, Implies) or f.cons != p.concl or f.ant != prem[1].concl:
            fail("premises do not form modus ponens")
    elif r == "all_i":
        arity(1)
        q = prem[0]
        if not isinstance(p.concl, Forall) or len(p.data) != 1:
            fail("conclusion is not a universal")
        y = p.data[0]
        if y in p.ctx:
            fail(f"eigenvariable {y} already in context")
        if q.ctx != p.ctx | {y}:
            fail("premise context must add the eigenvariable")
        hyps_within(q)
        if q.concl != replace(p.concl.body, {p.concl.var: Var(y)}):
            fail("premise is not the generic instance")
    elif r == "all_e":
        arity(1)
        q = prem[0]
        same_ctx(q)
        hyps_within(q)
        if not isinstance(q.concl, Forall) or len(p.data) != 1:
            fail("premise is not a universal")
        t = p.data[0]
        term_ok(t, p.ctx)
        if replace(q.concl.body, {q.concl.var: t}) != p.concl:
            fail("conclusion is not the instance")
    elif r == "ex_i":
        arity(1)
        q = prem[0]
        same_ctx(q)
        hyps_within(q)
        if not isinstance(p.concl, Exists) or len(p.data) != 1:
            fail("conclusion is not an existential")
        t = p.data[0]
        term_ok(t, p.ctx)
        if replace(p.concl.body, {p.concl.var: t}) != q.concl:
            fail("premise is not the instance")
    elif r == "ex_e":
        arity(2)
        major, minor = prem
        same_ctx(major)
        hyps_within(major)
        if not isinstance(major.concl, Exists) or len(p.data) != 1:
            fail("major premise is not an existential")
        y = p.data[0]
        if y in p.ctx:
            fail(f"eigenvariable {y} already in context")
        if minor.ctx != p.ctx | {y}:
            fail("minor premise context must add the eigenvariable")
        hyps_within(minor, [replace(major.concl.body, {major.concl.var: Var(y)})])
        if minor.concl != p.concl:
            fail("minor premise does not prove the conclusion")

    for i, q in enumerate(prem):
        _check(q, theory, path + (i,))


# ------------------------------------------------------ transformations


def transform(p: ProofTree, sigma: dict, ctx, extra_hyps=()) -> ProofTree:
    """Apply `sigma` (total on p.ctx, into Tm(ctx)) to the whole tree.

    Eigenvariables are renamed away from the new context; `extra_hyps` are
    added to every node (weakening).
    """
    ctx = frozenset(ctx)
    missing = p.ctx - sigma.keys()
    if missing:
        raise ProofError(f"substitution misses {sorted(missing)}")
    for t in sigma.values():
        if not term_vars(t) <= ctx:
            raise ProofError(f"term {t} outside the new context")
    extra = frozenset(extra_hyps)
    return _transform(p, {k: v for k, v in sigma.items() if k in p.ctx}, ctx, extra)


def _transform(p, sigma, ctx, extra):
    concl = substitute(p.concl, sigma)
    hyps = frozenset(substitute(h, sigma) for h in p.hyps) | extra
    data = p.data
    if p.rule in ("all_i", "ex_e"):
        y = p.data[0]
        y2 = fresh_name(y, set(ctx) | {v for h in extra for v in free_vars(h)})
        inner = dict(sigma)
        inner[y] = Var(y2)
        ictx = ctx | {y2}
        if p.rule == "all_i":
            prem = (_transform(p.premises[0], inner, ictx, extra),)
        else:
            prem = (
                _transform(p.premises[0], sigma, ctx, extra),
                _transform(p.premises[1], inner, ictx, extra),
            )
        return ProofTree(p.rule, ctx, hyps, concl, prem, (y2,))
    if p.rule in ("all_e", "ex_i"):
        data = (subst_term(p.data[0], sigma),)
    prem = tuple(_transform(q, sigma, ctx, extra) for q in p.premises)
    return ProofTree(p.rule, ctx, hyps, concl, prem, data)


def widen(p: ProofTree, ctx) -> ProofTree:
    """The same proof in a larger context."""
    return transform(p, {v: Var(v) for v in p.ctx}, ctx)


def _replace_hyps(p: ProofTree, atoms: frozenset, packed: Formula) -> ProofTree:
    """Swap hypotheses in `atoms` for the single conjunction `packed`."""
    hyps = (p.hyps - atoms) | {packed}
    if p.rule == "hyp" and p.concl in atoms:
        if p.concl == packed:
            return _node("hyp", p.ctx, hyps, p.concl)
        i = packed.parts.index(p.concl)
        return _node("and_e", p.ctx, hyps, p.concl, [_node("hyp", p.ctx, hyps, packed)], [i])
    prem = tuple(_replace_hyps(q, atoms, packed) for q in p.premises)
    return ProofTree(p.rule, p.ctx, hyps, p.concl, prem, p.data)


def hyp(f: Formula, ctx, hyps=()) -> ProofTree:
    return _node("hyp", ctx, set(hyps) | {f}, f)


# ------------------------------------------------ local character of proofs


def local_prov(d: Derivation, leg_proofs, psi: Formula, theory: Theory) -> ProofTree:
    """Glue proofs of psi·f at the legs f of `d` into T, A ⊢_X psi."""
    legs = list(leg_proofs)
    leaves = d.leaves()
    if len(legs) != len(leaves):
        raise ProofError(f"{len(legs)} leg proofs for {len(leaves)} legs")
    for f, q in zip(leaves, legs):
        if q.ctx != f.dom.vars or not q.hyps <= f.dom.atoms or q.concl != substitute(psi, f.mapping):
            raise ProofError(f"leg proof does not match leg {f}")
    return _local(d, legs, psi, theory)


def _local(d, legs, psi, theory):
    c = d.root
    if isinstance(d, IsoBase):
        inv = iso_inverse(d.iso)
        return transform(legs[0], inv.mapping, c.vars)
    assert isinstance(d, AxiomStep)
    inst = d.instance
    ax = inst.axiom
    hyps = c.atoms
    node = _node("axiom", c.vars, hyps, ax.to_formula(), (), (inst.index,))
    for v, t in inst.inst:
        f = node.concl
        node = _node("all_e", c.vars, hyps, replace(f.body, {f.var: t}), [node], [t])
    imp = node.concl
    ant = imp.ant
    if isinstance(ant, Top):
        ant_proof = _node("top_i", c.vars, hyps, ant)
    elif isinstance(ant, And):
        ant_proof = _node("and_i", c.vars, hyps, ant, [hyp(a, c.vars, hyps) for a in ant.parts])
    else:
        ant_proof = hyp(ant, c.vars, hyps)
    major = _node("imp_e", c.vars, hyps, imp.cons, [node, ant_proof])

    # per disjunct: the child's proof, opened by existential eliminations
    cases = []
    pos = 0
    for i, child in enumerate(d.children):
        n = len(child.leaves())
        sub = _local(child, legs[pos:pos + n], psi, theory)
        pos += n
        ext, _, ren = inst.extensions[i]
        delta = imp.cons.parts[i] if isinstance(imp.cons, Or) else imp.cons
        cases.append(_open_case(c, delta, [ren[v].name for v in ax.disjuncts[i][0]], sub, psi, ext))
    if not d.children:
        return _node("bot_e", c.vars, hyps, psi, [major])
    if len(cases) == 1:
        return _chain(c.vars, hyps, major, cases[0], psi)
    minors = [
        _chain(c.vars, hyps | {di}, hyp(di, c.vars, hyps), case, psi) for di, case in zip(imp.cons.parts, cases)
    ]
    return _node("or_e", c.vars, hyps, psi, [major] + minors)


def _open_case(c, delta, names, sub, psi, ext):
    """Steps (eigenvariable, formula) from delta down to its atom conjunction."""
    steps = []
    f = delta
    for n in names:
        steps.append((n, f))
        f = replace(f.body, {f.var: Var(n)})
    packed = f
    atoms = frozenset(packed.parts) if isinstance(packed, And) else (
        frozenset() if isinstance(packed, Top) else frozenset([packed])
    )
    new_atoms = atoms - c.atoms
    body = sub
    if isinstance(packed, Top):
        pass
    elif new_atoms:
        body = _replace_hyps(sub, frozenset(new_atoms), packed)
    return steps, packed, body


def _chain(ctx, hyps, major, case, psi):
    steps, packed, body = case
    if not steps:
        if isinstance(packed, Top):
            return widen_hyps(body, hyps)
        # no witnesses: discharge the atoms by an implication
        lam = _node("imp_i", ctx, hyps, Implies(packed, psi), [widen_hyps(body, hyps | {packed})])
        return _node("imp_e", ctx, hyps, psi, [lam, major])
    return _ex_chain(frozenset(ctx), frozenset(hyps), major, steps, packed, body, psi)


def _ex_chain(ctx, hyps, major, steps, packed, body, psi):
    (y, f), rest = steps[0], steps[1:]
    inner_ctx = ctx | {y}
    opened = replace(f.body, {f.var: Var(y)})
    if rest:
        inner_major = hyp(opened, inner_ctx, hyps | {opened})
        minor = _ex_chain(inner_ctx, hyps | {opened}, inner_major, rest, packed, body, psi)
    else:
        minor = widen_hyps(body, hyps | {opened})
    return _node("ex_e", ctx, hyps, psi, [major, minor], [y])


def widen_hyps(p: ProofTree, hyps) -> ProofTree:
    """Record extra available hypotheses at every node (still a valid proof)."""
    hyps = frozenset(hyps)
    return ProofTree(p.rule, p.ctx, p.hyps | hyps, p.concl, tuple(widen_hyps(q, hyps) for q in p.premises), p.data)


# --------------------------------------------------------- extraction


def extract_proof(kind: SiteKind, c: Condition, phi: Formula, w, theory: Theory, *, verify: bool = True) -> ProofTree:
    """Turn a forcing witness into a proof of T, A ⊢_X phi."""
    gg = is_generalized_geometric(phi)
    if not gg:
        raise ProofError(f"not generalized geometric at {gg.offender}")
    if verify and not check_witness(kind, c, phi, theory, w):
        raise ProofError("witness does not check")
    return _extract(c, phi, w, theory)


def _extract(c, phi, w, theory):
    X, A = c.vars, c.atoms
    if isinstance(w, TopW):
        return _node("top_i", X, A, phi)
    if isinstance(w, FactW):
        legs = [hyp(substitute(phi, f.mapping), f.dom.vars, f.dom.atoms) for f in w.deriv.leaves()]
        return local_prov(w.deriv, legs, phi, theory)
    if isinstance(w, EqW):
        legs = []
        for f in w.deriv.leaves():
            legs.append(_node("refl", f.dom.vars, f.dom.atoms, substitute(phi, f.mapping)))
        return local_prov(w.deriv, legs, phi, theory)
    if isinstance(w, BotW):
        return local_prov(w.deriv, [], phi, theory)
    if isinstance(w, OrW):
        legs = []
        for f, (i, sub) in zip(w.deriv.leaves(), w.legs):
            target = substitute(phi, f.mapping)
            inner = _extract(f.dom, target.parts[i], sub, theory)
            legs.append(_node("or_i", f.dom.vars, f.dom.atoms, target, [inner], [i]))
        return local_prov(w.deriv, legs, phi, theory)
    if isinstance(w, ExistsW):
        legs = []
        for f, (t, sub) in zip(w.deriv.leaves(), w.legs):
            target = substitute(phi, f.mapping)
            inner = _extract(f.dom, _instance_at(phi, f, t), sub, theory)
            legs.append(_node("ex_i", f.dom.vars, f.dom.atoms, target, [inner], [t]))
        return local_prov(w.deriv, legs, phi, theory)
    if isinstance(w, AndW):
        parts = [_extract(c, p, s, theory) for p, s in zip(phi.parts, w.parts)]
        return _node("and_i", X, A, phi, parts)
    if isinstance(w, ImpliesW):
        return _extract_implies(c, phi, w, theory)
    if isinstance(w, ForallEnumW):
        for f, t, sub in w.entries:
            if t == Var(w.var) and f.dom == c.extend(vars=[w.var]):
                return _extract(c, phi, ForallW(w.var, sub), theory)
        raise ProofError("enumeration witness lacks its generic entry")
    if isinstance(w, ForallW):
        ext = c.extend(vars=[w.var])
        premise = _extract(ext, replace(phi.body, {phi.var: Var(w.var)}), w.generic, theory)
        return _node("all_i", X, A, phi, [premise], [w.var])
    raise ProofError(f"no extraction for {type(w).__name__}")


def _extract_implies(c, phi, w, theory):
    X, A = c.vars, c.atoms
    if w.mode == "bot":
        inner = _node("bot_e", X, A | {BOT}, phi.cons, [hyp(BOT, X, A)])
        return _node("imp_i", X, A, phi, [inner])
    if w.mode in ("top", "cons"):
        return _node("imp_i", X, A, phi, [_extract(c, phi.cons, w.sub, theory)])
    if w.mode == "atom":
        ext = c.extend(atoms=[phi.ant])
        return _node("imp_i", X, A, phi, [_extract(ext, phi.cons, w.sub, theory)])
    raise ProofError(
        f"implication mode {w.mode!r} needs equality reasoning; reduce equations with the equality module first"
    )


# ------------------------------------------------------------ proving


@dataclass(frozen=True)
class ProveResult:
    status: str  # proved | refuted | unknown
    proof: ProofTree | None = None
    verdict: object = None
    condition: Condition | None = None


def prove(s: Sequent, theory: Theory, bounds: Bounds | None = None, kind: SiteKind = SiteKind.TS) -> ProveResult:
    """Search for a proof of an atomic-hypothesis sequent via forcing."""
    for h in s.hyps:
        if not isinstance(h, Atom) or h.is_equality:
            raise ProofError(f"hypotheses must be predicate atoms, got {h}")
    gg = is_generalized_geometric(s.concl)
    if not gg:
        raise ProofError(f"goal is not generalized geometric at {gg.offender}")
    c = Condition.of(s.ctx, s.hyps)
    v = force(kind, c, s.concl, theory, bounds)
    if isinstance(v, Forced):
        return ProveResult("proved", extract_proof(kind, c, s.concl, v.witness, theory), v, c)
    if isinstance(v, NotForced):
        return ProveResult("refuted", None, v, c)
    return ProveResult("unknown", None, v, c)


__all__ = [
    "CheckResult",
    "ProofError",
    "ProofTree",
    "ProveResult",
    "RULES",
    "Sequent",
    "check_proof",
    "extract_proof",
    "hyp",
    "local_prov",
    "prove",
    "transform",
    "widen",
]
