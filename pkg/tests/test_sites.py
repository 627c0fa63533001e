import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cohforce.sites import (
    TERMINAL,
    Condition,
    Morphism,
    MorphismError,
    SiteKind,
    compose,
    enumerate_terms,
    equalizer_counterexamples,
    equalizer_vs,
    factor_through,
    find_morphisms,
    fresh_extension,
    identity,
    is_iso,
    iso_inverse,
    pullback_mediator,
    pullback_vs,
)
from cohforce.syntax import App, Atom, Signature, Var

from strategies import SIG_FUN, SIG_REL, random_condition, random_morphism_into


def P(*xs):
    return Atom("P", tuple(Var(x) for x in xs))


def Q(*xs):
    return Atom("Q", tuple(Var(x) for x in xs))


def test_morphism_must_preserve_facts():
    x = Condition.of({"x"}, {P("x")})
    y = Condition.of({"y"})
    with pytest.raises(MorphismError):
        Morphism.make(y, x, {"x": Var("y")})


def test_morphism_must_be_total():
    with pytest.raises(MorphismError):
        Morphism.make(Condition.of({"y"}), Condition.of({"x", "z"}), {"x": Var("y")})


def test_kind_is_computed_from_substitution():
    xy = Condition.of({"x", "y"})
    w = Condition.of({"w", "v"})
    assert Morphism.make(w, xy, {"x": Var("w"), "y": Var("v")}).kind == SiteKind.RN
    assert Morphism.make(w, xy, {"x": Var("w"), "y": Var("w")}).kind == SiteKind.VS
    m = Morphism.make(w, xy, {"x": App("f", (Var("w"),)), "y": Var("v")})
    assert m.kind == SiteKind.TS
    assert m.in_site(SiteKind.TS) and not m.in_site(SiteKind.VS)


def test_site_kind_parse():
    assert SiteKind.parse("rn") == SiteKind.RN
    assert SiteKind.parse("Vs") == SiteKind.VS
    assert str(SiteKind.TS) == "ts"


def test_compose_direction():
    # f: (u;) -> (y;), g: (y;) -> (x;)
    f = Morphism.make(Condition.of({"u"}), Condition.of({"y"}), {"y": App("f", (Var("u"),))})
    g = Morphism.make(Condition.of({"y"}), Condition.of({"x"}), {"x": App("f", (Var("y"),))})
    h = compose(g, f)
    assert h.dom == f.dom and h.cod == g.cod
    assert str(h("x")) == "f(f(u))"
    with pytest.raises(MorphismError):
        compose(f, g)


def test_iso_inverse():
    a = Condition.of({"x", "y"}, {Q("x", "y")})
    b = Condition.of({"u", "v"}, {Q("v", "u")})
    m = Morphism.make(b, a, {"x": Var("v"), "y": Var("u")})
    inv = iso_inverse(m)
    assert inv is not None
    assert compose(m, inv) == identity(a)
    extra = Condition.of({"u", "v"}, {Q("v", "u"), P("u")})
    assert not is_iso(Morphism.make(extra, a, {"x": Var("v"), "y": Var("u")}))


def test_pullback_merges_variables():
    x = Condition.of({"x"})
    yz = Condition.of({"y", "z"}, {P("y")})
    w = Condition.of({"w"}, {Q("w", "w")})
    f = Morphism.make(yz, x, {"x": Var("y")})
    g = Morphism.make(w, x, {"x": Var("w")})
    apex, i, j = pullback_vs(f, g)
    assert compose(f, i) == compose(g, j)
    assert len(apex.vars) == 2
    assert len(apex.atoms) == 2


def test_pullback_mediator_commutes():
    rng = random.Random(3)
    for _ in range(50):
        x = random_condition(rng)
        f = random_morphism_into(rng, x, SiteKind.VS, prefix="a")
        g = random_morphism_into(rng, x, SiteKind.VS, prefix="b")
        apex, i, j = pullback_vs(f, g)
        h = pullback_mediator(i, j, i, j)
        assert h == identity(apex) or is_iso(h)


def test_equalizer_vs():
    yz = Condition.of({"y", "z"}, {P("y")})
    x = Condition.of({"x"})
    f = Morphism.make(yz, x, {"x": Var("y")})
    g = Morphism.make(yz, x, {"x": Var("z")})
    e = equalizer_vs(f, g)
    assert compose(f, e) == compose(g, e)
    assert len(e.dom.vars) == 1


def test_equalizer_counterexamples_validate():
    certs = equalizer_counterexamples()
    assert {c.site for c in certs} == {SiteKind.TS, SiteKind.RN}
    assert all(c.check() for c in certs)


def test_fresh_extension_renames_clashes():
    c = Condition.of({"x"}, {P("x")})
    ext, e = fresh_extension(c, ["x"], [P("x")])
    assert len(ext.vars) == 2
    assert e.cod == c and e.dom == ext
    assert e.kind == SiteKind.RN


def test_enumerate_terms_counts():
    sig = Signature((("c", 0), ("f", 1), ("g", 2)), ())
    assert len(enumerate_terms(["x"], sig, 0)) == 2
    # depth 1: x, c, f(x), f(c), g(-,-) over {x, c}
    assert len(enumerate_terms(["x"], sig, 1)) == 2 + 2 + 4


def test_find_morphisms_respects_kind():
    src = Condition.of({"x", "y"})
    tgt = Condition.of({"u"})
    assert len(list(find_morphisms(src, tgt, SiteKind.VS))) == 1
    assert list(find_morphisms(src, tgt, SiteKind.RN)) == []
    ts = list(find_morphisms(src, tgt, SiteKind.TS, signature=SIG_FUN, term_depth=1))
    assert len(ts) == 16  # u, c, f(u), f(c) for each of x, y


def test_factor_through():
    x = Condition.of({"x"}, {P("x")})
    yz = Condition.of({"y", "z"}, {P("y"), Q("y", "z")})
    g = Morphism.make(yz, x, {"x": Var("y")})
    w = Condition.of({"w"}, {P("w"), Q("w", "w")})
    f = Morphism.make(w, x, {"x": Var("w")})
    h = factor_through(f, g, SiteKind.VS)
    assert h is not None and compose(g, h) == f
    assert factor_through(f, g, SiteKind.RN) is None or compose(g, factor_through(f, g, SiteKind.RN)) == f


def test_terminal_has_unique_map():
    c = Condition.of({"x"}, {P("x")})
    assert len(list(find_morphisms(TERMINAL, c, SiteKind.RN))) == 1


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10 ** 9), st.sampled_from(list(SiteKind)))
def test_category_laws_property(seed, kind):
    rng = random.Random(seed)
    sig = SIG_FUN if kind == SiteKind.TS else SIG_REL
    x = random_condition(rng, sig)
    g = random_morphism_into(rng, x, kind, sig, prefix="y")
    f = random_morphism_into(rng, g.dom, kind, sig, prefix="z")
    e = random_morphism_into(rng, f.dom, kind, sig, prefix="u")
    assert compose(compose(g, f), e) == compose(g, compose(f, e))
    assert compose(g, identity(g.dom)) == g
    assert compose(identity(g.cod), g) == g
    assert compose(g, f).in_site(kind)
