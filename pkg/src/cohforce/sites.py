"""Conditions (X;A) and the three morphism classes between them.

A morphism ``f: (Y;B) -> (X;A)`` is a substitution ``X -> Tm(Y)`` with
``A f ⊆ B``.  Its kind (renaming, variable substitution, term
substitution) is computed from the substitution, so one value serves all
three categories.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping

from .syntax import (
    App,
    Atom,
    Signature,
    Term,
    Var,
    fresh_name,
    match_term,
    subst_term,
    term_key,
    term_vars,
)


class SiteKind(enum.IntEnum):
    RN = 0
    VS = 1
    TS = 2

    @classmethod
    def parse(cls, text: str) -> "SiteKind":
        try:
            return cls[text.upper()]
        except KeyError:
            raise ValueError(f"unknown site {text!r}; expected rn, vs or ts") from None

    def __str__(self) -> str:
        return self.name.lower()


class MorphismError(ValueError):
    pass


def sorted_atoms(atoms: Iterable[Atom]) -> list:
    return sorted(atoms, key=str)


@dataclass(frozen=True)
class Condition:
    vars: frozenset
    atoms: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "vars", frozenset(self.vars))
        object.__setattr__(self, "atoms", frozenset(self.atoms))
        for a in self.atoms:
            if a.is_equality:
                raise MorphismError(f"conditions cannot contain equality facts: {a}")
            if not a.vars() <= self.vars:
                raise MorphismError(f"atom {a} mentions variables outside {sorted(self.vars)}")

    @classmethod
    def of(cls, vars: Iterable[str] = (), atoms: Iterable[Atom] = ()) -> "Condition":
        return cls(frozenset(vars), frozenset(atoms))

    def __str__(self) -> str:
        vs = ",".join(sorted(self.vars))
        at = ",".join(str(a) for a in sorted_atoms(self.atoms))
        return f"({vs}; {at})" if at else f"({vs};)"

    def literal(self) -> str:
        """The `vars : atoms` concrete syntax."""
        vs = ",".join(sorted(self.vars))
        at = ", ".join(str(a) for a in sorted_atoms(self.atoms))
        return f"{vs} : {at}" if at else f"{vs} :"

    def extend(self, vars: Iterable[str] = (), atoms: Iterable[Atom] = ()) -> "Condition":
        return Condition(self.vars | frozenset(vars), self.atoms | frozenset(atoms))

    def subterms(self) -> set:
        from .syntax import subterms

        out: set = set()
        for a in self.atoms:
            for t in a.args:
                out.update(subterms(t))
        return out


TERMINAL = Condition.of()


@dataclass(frozen=True)
class Morphism:
    dom: Condition
    cod: Condition
    subst: tuple  # sorted (var, term) pairs, total on cod.vars

    def __post_init__(self):
        subst = tuple(sorted(dict(self.subst).items()))
        object.__setattr__(self, "subst", subst)
        keys = {k for k, _ in subst}
        if keys != set(self.cod.vars):
            raise MorphismError(f"substitution domain {sorted(keys)} differs from {sorted(self.cod.vars)}")
        for _, t in subst:
            if not term_vars(t) <= self.dom.vars:
                raise MorphismError(f"image term {t} is not over {sorted(self.dom.vars)}")
        m = self.mapping
        for a in self.cod.atoms:
            if a.subst(m) not in self.dom.atoms:
                raise MorphismError(f"fact {a} is not preserved: {a.subst(m)} missing in {self.dom}")

    @classmethod
    def make(cls, dom: Condition, cod: Condition, sigma: Mapping[str, Term]) -> "Morphism":
        return cls(dom, cod, tuple(sigma.items()))

    @cached_property
    def mapping(self) -> dict:
        return dict(self.subst)

    def __call__(self, var: str) -> Term:
        return self.mapping[var]

    @cached_property
    def kind(self) -> SiteKind:
        images = [t for _, t in self.subst]
        if not all(isinstance(t, Var) for t in images):
            return SiteKind.TS
        if len(set(images)) != len(images):
            return SiteKind.VS
        return SiteKind.RN

    def in_site(self, kind: SiteKind) -> bool:
        return self.kind <= kind

    def subst_str(self) -> str:
        return "[" + ",".join(f"{k}:={t}" for k, t in self.subst) + "]"

    def __str__(self) -> str:
        return f"{self.subst_str()} : {self.dom} -> {self.cod}"


def identity(c: Condition) -> Morphism:
    return Morphism.make(c, c, {v: Var(v) for v in c.vars})


def compose(g: Morphism, f: Morphism) -> Morphism:
    """g∘f for f: Z -> Y and g: Y -> X; the substitution sends x to (x g) f."""
    if g.dom != f.cod:
        raise MorphismError(f"cannot compose: {g.dom} is not {f.cod}")
    fm = f.mapping
    return Morphism.make(f.dom, g.cod, {x: subst_term(t, fm) for x, t in g.subst})


def iso_inverse(m: Morphism) -> Morphism | None:
    """The inverse of `m` if it is an isomorphism, else None."""
    if m.kind != SiteKind.RN:
        return None
    images = {t.name for _, t in m.subst}
    if images != set(m.dom.vars):
        return None
    inv = {t.name: Var(x) for x, t in m.subst}
    if frozenset(a.subst(m.mapping) for a in m.cod.atoms) != m.dom.atoms:
        return None
    return Morphism.make(m.cod, m.dom, inv)


def is_iso(m: Morphism) -> bool:
    return iso_inverse(m) is not None


def to_terminal(c: Condition) -> Morphism:
    return Morphism.make(c, TERMINAL, {})


# --------------------------------------------------------- limits


class _UnionFind:
    def __init__(self, items, rank):
        self.parent = {i: i for i in items}
        self.rank = rank  # smaller is preferred as representative

    def find(self, i):
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.rank(rb) < self.rank(ra):
            ra, rb = rb, ra
        self.parent[rb] = ra


def _rename_apart(c: Condition, avoid: Iterable[str]) -> tuple:
    """Copy of `c` whose variables avoid `avoid`, plus the old->new map."""
    used = set(avoid)
    ren = {}
    for v in sorted(c.vars):
        new = fresh_name(v, used)
        used.add(new)
        ren[v] = new
    vm = {k: Var(v) for k, v in ren.items()}
    return Condition.of(ren.values(), (a.subst(vm) for a in c.atoms)), ren


def pullback_vs(f: Morphism, g: Morphism) -> tuple:
    """Pullback of a cospan of variable substitutions.

    Returns ``(apex, i, j)`` with ``i: apex -> f.dom``, ``j: apex -> g.dom``
    and ``f∘i == g∘j``.  The apex variables are the pushout of
    ``f.dom.vars <- cod.vars -> g.dom.vars``, keeping the left names and
    suffixing clashing right names.
    """
    if f.cod != g.cod:
        raise MorphismError("not a cospan")
    if not (f.in_site(SiteKind.VS) and g.in_site(SiteKind.VS)):
        raise MorphismError("pullback_vs needs variable substitutions")
    left, right = f.dom, g.dom
    right_copy, ren = _rename_apart(right, left.vars)
    items = [("L", v) for v in sorted(left.vars)] + [("R", ren[v]) for v in sorted(right.vars)]

    def rank(item):
        return (0 if item[0] == "L" else 1, item[1])

    uf = _UnionFind(items, rank)
    for x in sorted(f.cod.vars):
        uf.union(("L", f(x).name), ("R", ren[g(x).name]))
    rep = {item: uf.find(item)[1] for item in items}
    i_map = {v: Var(rep[("L", v)]) for v in left.vars}
    j_map = {v: Var(rep[("R", ren[v])]) for v in right.vars}
    apex_vars = set(rep.values())
    atoms = {a.subst(i_map) for a in left.atoms} | {a.subst(j_map) for a in right.atoms}
    apex = Condition.of(apex_vars, atoms)
    return apex, Morphism.make(apex, left, i_map), Morphism.make(apex, right, j_map)


def pullback_mediator(apex_i: Morphism, apex_j: Morphism, i2: Morphism, j2: Morphism) -> Morphism:
    """The unique h with i∘h = i2 and j∘h = j2 for a commuting cone (i2, j2)."""
    apex = apex_i.dom
    h: dict = {}
    for y, w in apex_i.subst:
        h.setdefault(w.name, i2(y))
    for z, w in apex_j.subst:
        h.setdefault(w.name, j2(z))
    return Morphism.make(i2.dom, apex, h)


def product_ts(c1: Condition, c2: Condition) -> tuple:
    """Binary product: ``(apex, proj1, proj2)``, variables renamed apart."""
    return pullback_vs(to_terminal(c1), to_terminal(c2))


def fresh_extension(c: Condition, newvars: Iterable[str] = (), newatoms: Iterable[Atom] = ()) -> tuple:
    """Extend `c` by fresh variables and atoms; returns ``(ext, e)``.

    Clashing new variable names are suffixed (and renamed in `newatoms`);
    ``e: ext -> c`` is the identity on ``c.vars``.
    """
    used = set(c.vars)
    ren = {}
    for v in newvars:
        new = fresh_name(v, used)
        used.add(new)
        ren[v] = Var(new)
    atoms = [a.subst(ren) for a in newatoms]
    ext = Condition.of(c.vars | {t.name for t in ren.values()}, c.atoms | set(atoms))
    return ext, Morphism.make(ext, c, {v: Var(v) for v in c.vars})


def equalizer_vs(f: Morphism, g: Morphism) -> Morphism:
    """Equalizer in C_vs of a parallel pair ``f, g: (Y;B) -> (X;A)``.

    Quotient of Y by the identifications ``f(x) ~ g(x)``.
    """
    if f.dom != g.dom or f.cod != g.cod:
        raise MorphismError("not a parallel pair")
    if not (f.in_site(SiteKind.VS) and g.in_site(SiteKind.VS)):
        raise MorphismError("equalizer_vs needs variable substitutions")
    dom = f.dom
    uf = _UnionFind(sorted(dom.vars), lambda v: v)
    for x in f.cod.vars:
        uf.union(f(x).name, g(x).name)
    q = {v: Var(uf.find(v)) for v in dom.vars}
    apex = Condition.of({t.name for t in q.values()}, (a.subst(q) for a in dom.atoms))
    return Morphism.make(apex, dom, q)


# ------------------------------------------------- morphism search


def enumerate_terms(vars: Iterable[str], signature: Signature | None, depth: int) -> list:
    """Tm(vars) up to application depth `depth`, ordered by depth then text."""
    level = [Var(v) for v in sorted(vars)]
    if signature is not None:
        level += [App(c) for c in signature.constants]
    terms = set(level)
    if signature is not None:
        funs = [(n, a) for n, a in signature.functions if a > 0]
        for _ in range(depth):
            current = sorted(terms, key=term_key)
            new = set()
            for n, a in funs:
                for args in itertools.product(current, repeat=a):
                    new.add(App(n, args))
            terms |= new
    return sorted(terms, key=term_key)


def find_morphisms(
    src: Condition,
    tgt: Condition,
    kind: SiteKind,
    partial: Mapping[str, Term] | None = None,
    signature: Signature | None = None,
    term_depth: int = 0,
) -> Iterator[Morphism]:
    """All morphisms ``tgt -> src`` of the given kind extending `partial`.

    The substitution maps ``src.vars`` into ``Tm(tgt.vars)``.  Variables
    constrained by atoms are found by matching ``src.atoms`` into
    ``tgt.atoms``; free-floating ones range over variables (rn, vs) or
    terms up to `term_depth` (ts).
    """
    sigma0 = dict(partial or {})
    if not set(sigma0) <= set(src.vars):
        return
    atoms = sorted_atoms(src.atoms)
    by_pred: dict = {}
    for b in sorted_atoms(tgt.atoms):
        by_pred.setdefault((b.pred, len(b.args)), []).append(b)
    if kind == SiteKind.TS:
        pool = enumerate_terms(tgt.vars, signature, term_depth)
    else:
        pool = [Var(v) for v in sorted(tgt.vars)]
    seen: set = set()

    def ok_kind(sigma) -> bool:
        vals = list(sigma.values())
        if kind <= SiteKind.VS and not all(isinstance(t, Var) for t in vals):
            return False
        if kind == SiteKind.RN and len(set(vals)) != len(vals):
            return False
        return True

    def match_atoms(idx, sigma):
        if not ok_kind(sigma):
            return
        if idx == len(atoms):
            yield sigma
            return
        a = atoms[idx]
        for b in by_pred.get((a.pred, len(a.args)), ()):
            s = sigma
            for p, q in zip(a.args, b.args):
                s = match_term(p, q, s)
                if s is None:
                    break
            if s is not None:
                yield from match_atoms(idx + 1, s)

    rest_vars = sorted(src.vars)
    for sigma in match_atoms(0, sigma0):
        free = [v for v in rest_vars if v not in sigma]
        for combo in itertools.product(pool, repeat=len(free)):
            s = dict(sigma)
            s.update(zip(free, combo))
            if not ok_kind(s):
                continue
            if any(not term_vars(t) <= tgt.vars for t in s.values()):
                continue
            key = tuple(sorted(s.items(), key=lambda kv: kv[0]))
            if key in seen:
                continue
            seen.add(key)
            yield Morphism.make(tgt, src, s)


def factor_through(f: Morphism, g: Morphism, kind: SiteKind, signature=None, term_depth=0) -> Morphism | None:
    """Some h with ``g∘h == f`` and h of the given kind, or None."""
    if f.cod != g.cod:
        return None
    sigma: dict = {}
    for x in sorted(g.cod.vars):
        sigma = match_term(g(x), f(x), sigma)
        if sigma is None:
            return None
    for h in find_morphisms(g.dom, f.dom, kind, sigma, signature, term_depth):
        return h
    return None


# ------------------------------------------------ counterexamples


@dataclass(frozen=True)
class EqualizerCertificate:
    site: SiteKind
    arrows: tuple  # the parallel pair
    claim: str
    witness: Morphism | None = None  # equalizing arrow outside the site, if any
    checked_domains: tuple = field(default=())

    def check(self) -> bool:
        f, g = self.arrows
        if f.dom != g.dom or f.cod != g.cod or not (f.in_site(self.site) and g.in_site(self.site)):
            return False
        if self.witness is not None:
            if compose(f, self.witness) != compose(g, self.witness):
                return False
            if self.witness.in_site(self.site):
                return False
        # no arrow of the site equalizes the pair, over every checked domain
        for d in self.checked_domains:
            for h in find_morphisms(f.dom, d, self.site):
                if compose(f, h).subst == compose(g, h).subst:
                    return False
        if self.site == SiteKind.TS:
            # the images are distinct closed terms, so no substitution identifies them
            for x in f.cod.vars:
                s, t = f(x), g(x)
                if term_vars(s) or term_vars(t) or s == t:
                    return False
        if self.site == SiteKind.RN:
            # the pair sends x to distinct variables; injective maps keep them apart
            if not any(f(x) != g(x) and isinstance(f(x), Var) and isinstance(g(x), Var) for x in f.cod.vars):
                return False
        return True


def equalizer_counterexamples() -> tuple:
    """Certificates that C_ts and C_rn lack equalizers.

    (a) ``[x:=0],[x:=1]: (;) ⇉ (x;)`` has no equalizing cone in C_ts.
    (b) ``[x:=y],[x:=z]: (y,z;) ⇉ (x;)`` is equalized by the non-injective
    ``[y:=w,z:=w]`` but by no renaming.
    """
    sig01 = Signature(functions=(("0", 0), ("1", 0)))
    target = Condition.of({"x"})
    f_ts = Morphism.make(TERMINAL, target, {"x": App("0")})
    g_ts = Morphism.make(TERMINAL, target, {"x": App("1")})
    small = tuple(Condition.of({f"w{i}" for i in range(n)}) for n in range(4))
    ts = EqualizerCertificate(
        SiteKind.TS,
        (f_ts, g_ts),
        "no cone: 0 and 1 stay distinct under every substitution",
        checked_domains=small,
    )
    yz = Condition.of({"y", "z"})
    f_rn = Morphism.make(yz, target, {"x": Var("y")})
    g_rn = Morphism.make(yz, target, {"x": Var("z")})
    merge = Morphism.make(Condition.of({"w"}), yz, {"y": Var("w"), "z": Var("w")})
    rn = EqualizerCertificate(
        SiteKind.RN,
        (f_rn, g_rn),
        "equalized only by the variable substitution [y:=w,z:=w]",
        witness=merge,
        checked_domains=small,
    )
    del sig01
    return ts, rn
