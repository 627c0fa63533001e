"""The coverage generated by a coherent theory, as derivation trees.

A derivation is either an iso leaf or an axiom step with one child per
disjunct of an axiom instance.  Sinks are read off derivations; the
stability, transitivity and common-refinement constructions are
transformations of derivations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, NamedTuple, Sequence

from .sites import (
    Condition,
    Morphism,
    MorphismError,
    SiteKind,
    compose,
    enumerate_terms,
    factor_through,
    fresh_extension,
    identity,
    iso_inverse,
    sorted_atoms,
)
from .syntax import (
    CoherentAxiom,
    Theory,
    Var,
    fresh_name,
    match_term,
    subst_term,
    term_key,
    term_vars,
)


class CoverageError(ValueError):
    pass


def check_equality_free(theory: Theory) -> None:
    for ax in theory.axioms:
        atoms = list(ax.antecedent) + [a for _, d in ax.disjuncts for a in d]
        if any(a.is_equality for a in atoms):
            raise CoverageError(f"axiom {ax} uses equality; the coverage needs an equality-free theory")


# ---------------------------------------------------------- instances


@dataclass(frozen=True)
class AxiomInstance:
    axiom: CoherentAxiom
    index: int  # position of the axiom in its theory
    target: Condition
    inst: tuple  # (universal variable, term) in the axiom's order

    @cached_property
    def sigma(self) -> dict:
        return dict(self.inst)

    def antecedent(self) -> frozenset:
        return frozenset(a.subst(self.sigma) for a in self.axiom.antecedent)

    def applicable(self) -> bool:
        return self.antecedent() <= self.target.atoms and all(
            term_vars(t) <= self.target.vars for _, t in self.inst
        )

    @cached_property
    def extensions(self) -> tuple:
        """Per disjunct: ``(extended condition, e, fresh-variable map)``."""
        out = []
        for exvars, atoms in self.axiom.disjuncts:
            used = set(self.target.vars)
            ren = {}
            for v in exvars:
                new = fresh_name(v, used)
                used.add(new)
                ren[v] = Var(new)
            s = dict(self.sigma)
            s.update(ren)
            ext, e = fresh_extension(self.target, [t.name for t in ren.values()], [a.subst(s) for a in atoms])
            out.append((ext, e, ren))
        return tuple(out)

    def disjunct_atoms(self, i: int, witnesses: dict) -> frozenset:
        """Atoms of disjunct `i` with existential variables set by `witnesses`."""
        s = dict(self.sigma)
        s.update(witnesses)
        return frozenset(a.subst(s) for a in self.axiom.disjuncts[i][1])

    def along(self, g: Morphism) -> "AxiomInstance":
        """The same axiom instantiated at ``g.dom`` through ``g``."""
        m = g.mapping
        return AxiomInstance(self.axiom, self.index, g.dom, tuple((v, subst_term(t, m)) for v, t in self.inst))

    def label(self) -> str:
        name = self.axiom.name or f"#{self.index}"
        return f"{name}[" + ",".join(f"{v}:={t}" for v, t in self.inst) + "]"


def _instantiations(ax: CoherentAxiom, c: Condition, pool: list) -> Iterator[dict]:
    atoms = sorted_atoms(ax.antecedent)
    by_pred: dict = {}
    for b in sorted_atoms(c.atoms):
        by_pred.setdefault((b.pred, len(b.args)), []).append(b)

    def go(idx, sigma):
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
                yield from go(idx + 1, s)

    for sigma in go(0, {}):
        free = [v for v in ax.univ if v not in sigma]
        for combo in itertools.product(pool, repeat=len(free)):
            s = dict(sigma)
            s.update(zip(free, combo))
            yield s


def axiom_instances(
    c: Condition,
    theory: Theory,
    kind: SiteKind = SiteKind.VS,
    term_depth: int = 0,
    pool: list | None = None,
) -> list:
    """All applicable instances of the theory's axioms at `c`.

    Antecedent variables are fixed by matching against the facts of `c`;
    universal variables absent from the antecedent range over ``Tm(X)``
    up to `term_depth` (depth 0 gives the variables and constants).  The
    same rule is used in every site: an instance only needs its free
    variables in X.  `kind` is accepted for interface symmetry.  An explicit
    `pool` replaces the depth-bounded term range.
    """
    check_equality_free(theory)
    if pool is None:
        pool = enumerate_terms(c.vars, theory.signature, term_depth)
    out = []
    for idx, ax in enumerate(theory.axioms):
        seen = set()
        found = []
        for s in _instantiations(ax, c, pool):
            key = tuple((v, s[v]) for v in ax.univ)
            if key in seen:
                continue
            if not all(term_vars(t) <= c.vars for _, t in key):
                continue
            seen.add(key)
            found.append(key)
        found.sort(key=lambda k: tuple(term_key(t) for _, t in k))
        out.extend(AxiomInstance(ax, idx, c, k) for k in found)
    return out


# --------------------------------------------------------- derivations


class Derivation:
    root: Condition

    def leaves(self) -> list:
        """Leaf morphisms into the root, depth-first, duplicates kept."""
        raise NotImplementedError

    def sink(self) -> "Sink":
        out = []
        seen = set()
        for f in self.leaves():
            key = (f.dom, f.subst)
            if key not in seen:
                seen.add(key)
                out.append(f)
        return Sink(self.root, tuple(out))

    def height(self) -> int:
        raise NotImplementedError

    def size(self) -> int:
        raise NotImplementedError


@dataclass(frozen=True)
class IsoBase(Derivation):
    root: Condition
    iso: Morphism

    def __post_init__(self):
        if self.iso.cod != self.root:
            raise CoverageError("iso leaf does not land in the root")

    def leaves(self) -> list:
        return [self.iso]

    def height(self) -> int:
        return 0

    def size(self) -> int:
        return 1


@dataclass(frozen=True)
class AxiomStep(Derivation):
    root: Condition
    instance: AxiomInstance
    children: tuple

    def __post_init__(self):
        if self.instance.target != self.root:
            raise CoverageError("axiom step instance is not at the root")
        if len(self.children) != len(self.instance.axiom.disjuncts):
            raise CoverageError("one child per disjunct is required")

    def leaves(self) -> list:
        out = []
        for (_, e, _), child in zip(self.instance.extensions, self.children):
            out.extend(compose(e, f) for f in child.leaves())
        return out

    def height(self) -> int:
        return 1 + max((c.height() for c in self.children), default=0)

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children)


CoverDerivation = Derivation


@dataclass(frozen=True)
class Sink:
    cod: Condition
    arrows: tuple

    def __post_init__(self):
        for f in self.arrows:
            if f.cod != self.cod:
                raise CoverageError("sink arrows must share the codomain")

    def key(self) -> frozenset:
        return frozenset((f.dom, f.subst) for f in self.arrows)

    def __len__(self) -> int:
        return len(self.arrows)

    def __iter__(self):
        return iter(self.arrows)


def trivial(c: Condition) -> IsoBase:
    return IsoBase(c, identity(c))


def check_derivation(d: Derivation, theory: Theory, kind: SiteKind = SiteKind.TS) -> bool:
    """Re-verify every node against the two inference rules."""
    if isinstance(d, IsoBase):
        return d.iso.cod == d.root and iso_inverse(d.iso) is not None
    if isinstance(d, AxiomStep):
        inst = d.instance
        if not (0 <= inst.index < len(theory.axioms)) or theory.axioms[inst.index] != inst.axiom:
            return False
        if inst.target != d.root or not inst.applicable():
            return False
        if [v for v, _ in inst.inst] != list(inst.axiom.univ):
            return False
        if len(d.children) != len(inst.axiom.disjuncts):
            return False
        for (ext, _, _), child in zip(inst.extensions, d.children):
            if child.root != ext or not check_derivation(child, theory, kind):
                return False
        return True
    return False


# ---------------------------------------------------------- enumeration


def covers(c: Condition, theory: Theory, kind: SiteKind = SiteKind.VS, depth: int = 1, term_depth: int = 0) -> Iterator[Derivation]:
    """Derivations of height <= depth, duplicate-free up to sink equality."""
    seen: set = set()
    for d in _derivations(c, theory, kind, depth, term_depth):
        key = d.sink().key()
        if key in seen:
            continue
        seen.add(key)
        yield d


def _derivations(c, theory, kind, depth, term_depth) -> Iterator[Derivation]:
    yield trivial(c)
    if depth <= 0:
        return
    for inst in axiom_instances(c, theory, kind, term_depth):
        options = [list(_derivations(ext, theory, kind, depth - 1, term_depth)) for ext, _, _ in inst.extensions]
        for kids in itertools.product(*options):
            yield AxiomStep(c, inst, tuple(kids))


def inconsistent(c: Condition, theory: Theory, kind: SiteKind = SiteKind.VS, depth: int = 1, term_depth: int = 0) -> Derivation | None:
    """A derivation of the empty sink with height <= depth, if one exists."""
    memo: dict = {}

    def search(cond, d):
        key = (cond, d)
        if key in memo:
            return memo[key]
        memo[key] = None
        if d > 0:
            for inst in axiom_instances(cond, theory, kind, term_depth):
                kids = []
                for ext, _, _ in inst.extensions:
                    sub = search(ext, d - 1)
                    if sub is None:
                        break
                    kids.append(sub)
                else:
                    memo[key] = AxiomStep(cond, inst, tuple(kids))
                    break
        return memo[key]

    return search(c, depth)


# ----------------------------------------------------------- refinement


class Refinement(NamedTuple):
    ok: bool
    table: tuple  # (f, g, h) with f == g∘h
    missing: object = None

    def __bool__(self) -> bool:
        return self.ok


def refines(u: Sink, v: Sink, kind: SiteKind = SiteKind.VS, signature=None, term_depth: int = 1) -> Refinement:
    """Does every arrow of `u` factor through some arrow of `v`?"""
    if u.cod != v.cod:
        raise CoverageError("refinement needs a common codomain")
    rows = []
    for f in u:
        for g in v:
            h = factor_through(f, g, kind, signature, term_depth)
            if h is not None:
                rows.append((f, g, h))
                break
        else:
            return Refinement(False, tuple(rows), f)
    return Refinement(True, tuple(rows))


# -------------------------------------------------------- transformations


def _lift(ext_src: Condition, ext_tgt: Condition, base: Morphism, ren_src: dict, ren_tgt: dict) -> Morphism:
    """Extend `base` to the extensions, sending fresh variables to fresh variables."""
    sigma = dict(base.mapping)
    for v, new in ren_tgt.items():
        sigma[new.name] = ren_src[v]
    return Morphism.make(ext_src, ext_tgt, sigma)


def pullback_cover_maps(d: Derivation, g: Morphism) -> tuple:
    """Pull `d` back along ``g: D -> root``.

    Returns ``(V, maps)`` where ``maps[j] = (i, m)`` says that the j-th leaf
    ``v`` of V and the i-th leaf ``u`` of d satisfy ``u∘m == g∘v``.
    """
    if g.cod != d.root:
        raise CoverageError("pullback along a morphism with the wrong codomain")
    D = g.dom
    if isinstance(d, IsoBase):
        inv = iso_inverse(d.iso)
        return trivial(D), [(0, compose(inv, g))]
    inst2 = d.instance.along(g)
    kids = []
    maps = []
    offset = 0
    for (ext_c, _, ren_c), (ext_d, _, ren_d), child in zip(d.instance.extensions, inst2.extensions, d.children):
        gi = _lift(ext_d, ext_c, g, ren_d, ren_c)
        v, sub = pullback_cover_maps(child, gi)
        kids.append(v)
        maps.extend((offset + i, m) for i, m in sub)
        offset += len(child.leaves())
    return AxiomStep(D, inst2, tuple(kids)), maps


def pullback_cover(d: Derivation, g: Morphism) -> Derivation:
    return pullback_cover_maps(d, g)[0]


def transport_iso(d: Derivation, f: Morphism) -> Derivation:
    """Move a derivation at ``f.dom`` to ``f.cod`` along an iso; the sink becomes f∘U."""
    inv = iso_inverse(f)
    if inv is None:
        raise CoverageError(f"not an isomorphism: {f}")
    if d.root != f.dom:
        raise CoverageError("transport along a morphism with the wrong domain")
    if isinstance(d, IsoBase):
        return IsoBase(f.cod, compose(f, d.iso))
    inst2 = d.instance.along(inv)
    kids = []
    for (ext_x, _, ren_x), (ext_y, _, ren_y), child in zip(d.instance.extensions, inst2.extensions, d.children):
        fi = _lift(ext_x, ext_y, f, ren_x, ren_y)
        kids.append(transport_iso(child, fi))
    return AxiomStep(f.cod, inst2, tuple(kids))


def graft(d: Derivation, subs: Sequence[Derivation]) -> Derivation:
    """Transitivity: replace the j-th leaf of `d` by a derivation at its domain."""
    subs = list(subs)
    if len(subs) != len(d.leaves()):
        raise CoverageError("one sub-derivation per leaf is required")
    for leg, s in zip(d.leaves(), subs):
        if s.root != leg.dom:
            raise CoverageError("sub-derivation is not at the leaf's domain")
    out, rest = _graft(d, subs)
    assert not rest
    return out


def _graft(d, subs):
    if isinstance(d, IsoBase):
        return transport_iso(subs[0], d.iso), subs[1:]
    kids = []
    for child in d.children:
        k, subs = _graft(child, subs)
        kids.append(k)
    return AxiomStep(d.root, d.instance, tuple(kids)), subs


def common_refinement(d1: Derivation, d2: Derivation) -> Derivation:
    """A derivation whose sink refines both sinks."""
    if d1.root != d2.root:
        raise CoverageError("derivations at different roots")
    return graft(d2, [pullback_cover(d1, g) for g in d2.leaves()])


def derivation_lines(d: Derivation, indent: int = 0) -> list:
    pad = "  " * indent
    if isinstance(d, IsoBase):
        return [f"{pad}iso {d.iso.subst_str()} : {d.iso.dom} -> {d.root}"]
    lines = [f"{pad}step {d.instance.label()} at {d.root}"]
    for child in d.children:
        lines.extend(derivation_lines(child, indent + 1))
    return lines


__all__ = [
    "AxiomInstance",
    "AxiomStep",
    "CoverDerivation",
    "CoverageError",
    "Derivation",
    "IsoBase",
    "MorphismError",
    "Refinement",
    "Sink",
    "axiom_instances",
    "check_derivation",
    "common_refinement",
    "covers",
    "derivation_lines",
    "graft",
    "inconsistent",
    "pullback_cover",
    "pullback_cover_maps",
    "refines",
    "transport_iso",
    "trivial",
]
