"""Line-oriented theory files, formulas and condition literals.

    pred P/1            fun f/1           equality on
    axiom [name :] forall x z. P(x) => Q(x,z) | exists w. R(x,w), S(w)
    axiom forall x. P(x) => false
    goal kernel : forall z. Q(x,z) | R(y,z)

Formulas use ``&``, ``|``, ``->``, ``~`` (negation), ``forall``,
``exists``, ``true``, ``false`` and ``=``.  A bare identifier in term
position is a constant if declared as one and a variable otherwise.
Comments start with ``#``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .sites import Condition
from .syntax import (
    BOT,
    TOP,
    And,
    App,
    Atom,
    CoherentAxiom,
    Exists,
    Forall,
    Formula,
    Implies,
    Or,
    Signature,
    SyntaxError_,
    Theory,
    Var,
    eq_atom,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int, expected=()):
        self.message = message
        self.line = line
        self.col = col
        self.expected = tuple(sorted(set(expected)))
        exp = f" (expected {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{line}:{col}: {message}{exp}")


_TOKEN = re.compile(r"\s*(?:(?P<sym>->|=>|[()&|,.:=/~])|(?P<id>[A-Za-z0-9_][A-Za-z0-9_']*)|(?P<bad>\S))")
KEYWORDS = {"forall", "exists", "true", "false"}


@dataclass(frozen=True)
class Tok:
    kind: str  # sym | id | end
    text: str
    line: int
    col: int


def tokenize(text: str, line: int = 1, col0: int = 0) -> list:
    out = []
    pos = 0
    while True:
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        if m.group("bad"):
            raise ParseError(f"unexpected character {m.group('bad')!r}", line, col0 + m.start("bad") + 1)
        kind = "sym" if m.group("sym") else "id"
        tx = m.group(kind)
        out.append(Tok(kind, tx, line, col0 + m.start(kind) + 1))
        pos = m.end()
    out.append(Tok("end", "", line, col0 + len(text.rstrip()) + 1))
    return out


class _Parser:
    def __init__(self, toks, sig: Signature, infer: bool = False):
        self.toks = toks
        self.i = 0
        self.sig = sig
        self.funs = dict(sig.functions)
        self.preds = dict(sig.predicates)
        self.infer = infer  # unknown applications declare function symbols

    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def error(self, msg, expected=(), tok=None):
        t = tok or self.tok
        return ParseError(msg, t.line, t.col, expected)

    def peek(self, text, k=0):
        t = self.toks[min(self.i + k, len(self.toks) - 1)]
        return t.text == text and t.kind != "end"

    def take(self, text=None, kind=None):
        t = self.tok
        if (text is not None and (t.text != text or t.kind == "end")) or (kind is not None and t.kind != kind):
            want = [repr(text)] if text else [kind]
            raise self.error(f"unexpected {t.text!r}" if t.kind != "end" else "unexpected end of input", want)
        self.i += 1
        return t

    def ident(self, what="identifier"):
        t = self.tok
        if t.kind != "id" or t.text in KEYWORDS:
            raise self.error(f"expected {what}, found {t.text or 'end of input'!r}", [what])
        self.i += 1
        return t

    def done(self):
        if self.tok.kind != "end":
            raise self.error(f"unexpected {self.tok.text!r}", ["end of line"])

    # ---- terms

    def term(self):
        t = self.ident("term")
        name = t.text
        if self.peek("("):
            if name not in self.funs and not self.infer:
                raise self.error(f"unknown function symbol {name}", tok=t)
            self.take("(")
            args = [] if self.peek(")") else self.terms()
            self.take(")")
            self.funs.setdefault(name, len(args))
            if self.funs[name] != len(args):
                raise self.error(f"{name} expects {self.funs[name]} arguments, got {len(args)}", tok=t)
            return App(name, tuple(args))
        if name in self.funs:
            if self.funs[name] != 0:
                raise self.error(f"{name} expects {self.funs[name]} arguments", tok=t)
            return App(name)
        return Var(name)

    def terms(self):
        out = [self.term()]
        while self.peek(","):
            self.take(",")
            out.append(self.term())
        return out

    # ---- formulas

    def formula(self):
        if self.peek("forall") or self.peek("exists"):
            return self.quant()
        left = self.disjunction()
        if self.peek("->"):
            self.take("->")
            return Implies(left, self.formula())
        return left

    def quant(self):
        word = self.take().text
        names = [self.ident("variable").text]
        while self.tok.kind == "id" and self.tok.text not in KEYWORDS:
            names.append(self.ident("variable").text)
        self.take(".")
        body = self.formula()
        for n in reversed(names):
            body = Forall(n, body) if word == "forall" else Exists(n, body)
        return body

    def disjunction(self):
        parts = [self.conjunction()]
        while self.peek("|"):
            self.take("|")
            parts.append(self.conjunction())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conjunction(self):
        parts = [self.unary()]
        while self.peek("&"):
            self.take("&")
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def unary(self):
        if self.peek("~"):
            self.take("~")
            return Implies(self.unary(), BOT)
        if self.peek("forall") or self.peek("exists"):
            return self.quant()
        if self.peek("("):
            self.take("(")
            f = self.formula()
            self.take(")")
            return f
        if self.peek("true"):
            self.take()
            return TOP
        if self.peek("false"):
            self.take()
            return BOT
        return self.atom()

    def atom(self):
        t = self.tok
        if t.kind != "id":
            raise self.error(
                f"unexpected {t.text!r}" if t.kind != "end" else "unexpected end of input",
                ["atom", "'('", "'true'", "'false'", "'forall'", "'exists'", "'~'"],
            )
        if t.text in self.preds:
            self.i += 1
            ar = self.preds[t.text]
            args = []
            if self.peek("("):
                self.take("(")
                args = [] if self.peek(")") else self.terms()
                self.take(")")
            if len(args) != ar:
                raise self.error(f"{t.text} expects {ar} arguments, got {len(args)}", tok=t)
            return Atom(t.text, tuple(args))
        if self.peek("(", 1) and t.text not in self.funs:
            raise self.error(f"unknown predicate {t.text}", ["predicate"], tok=t)
        left = self.term()
        if not self.peek("=") and isinstance(left, Var):
            raise self.error(f"unknown predicate {t.text}", ["predicate"], tok=t)
        if not self.peek("="):
            raise self.error(f"unexpected {self.tok.text or 'end of input'!r} after a term", ["'='"])
        eq = self.take("=")
        if not self.sig.with_equality:
            raise self.error("equality is off for this theory", tok=eq)
        return eq_atom(left, self.term())

    def atom_list(self):
        if self.peek("true"):
            self.take()
            return []
        out = [self.atom()]
        while self.peek(","):
            self.take(",")
            out.append(self.atom())
        return out


@dataclass
class TheoryFile:
    signature: Signature
    theory: Theory
    goals: dict = field(default_factory=dict)  # name -> Formula, in file order

    def goal(self, name: str) -> Formula:
        if name not in self.goals:
            raise KeyError(f"no goal named {name}")
        return self.goals[name]


def _decl(p: _Parser):
    name = p.ident("symbol name")
    p.take("/")
    ar = p.tok
    if ar.kind != "id" or not ar.text.isdigit():
        raise p.error(f"arity must be a number, found {ar.text or 'end of input'!r}", ["arity"])
    p.i += 1
    p.done()
    return name, int(ar.text)


def parse_theory(text: str) -> TheoryFile:
    funs: dict = {}
    preds: dict = {}
    eq = False
    axioms = []
    goals: dict = {}
    raw_axioms = []
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        toks = tokenize(line, n)
        head = toks[0]
        sig = Signature(tuple(sorted(funs.items())), tuple(sorted(preds.items())), eq)
        p = _Parser(toks, sig)
        p.i = 1
        if head.text in ("pred", "fun"):
            name, ar = _decl(p)
            if name.text in funs or name.text in preds:
                raise ParseError(f"{name.text} declared twice", n, name.col)
            (preds if head.text == "pred" else funs)[name.text] = ar
        elif head.text == "equality":
            v = p.tok
            if v.text not in ("on", "off"):
                raise p.error(f"unexpected {v.text or 'end of input'!r}", ["'on'", "'off'"])
            p.i += 1
            p.done()
            eq = v.text == "on"
        elif head.text == "axiom":
            raw_axioms.append((n, toks))
            name = ""
            if p.tok.kind == "id" and p.peek(":", 1) and p.tok.text not in KEYWORDS:
                name = p.take().text
                p.take(":")
            axioms.append(_axiom(p, name))
        elif head.text == "goal":
            name = p.ident("goal name")
            p.take(":")
            f = p.formula()
            p.done()
            if name.text in goals:
                raise ParseError(f"goal {name.text} defined twice", n, name.col)
            goals[name.text] = f
        else:
            raise ParseError(
                f"unknown declaration {head.text!r}", n, head.col, ["'pred'", "'fun'", "'equality'", "'axiom'", "'goal'"]
            )
    sig = Signature(tuple(sorted(funs.items())), tuple(sorted(preds.items())), eq)
    try:
        theory = Theory(sig, tuple(axioms))
    except SyntaxError_ as exc:
        raise ParseError(str(exc), raw_axioms[0][0] if raw_axioms else 1, 1) from None
    return TheoryFile(sig, theory, goals)


def _axiom(p: _Parser, name: str) -> CoherentAxiom:
    start = p.tok
    univ = []
    if p.peek("forall"):
        p.take()
        while p.tok.kind == "id" and p.tok.text not in KEYWORDS:
            univ.append(p.ident("variable").text)
        p.take(".")
    ant = p.atom_list()
    p.take("=>")
    disjuncts = []
    if p.peek("false") and p.toks[p.i + 1].kind == "end":
        p.take()
    else:
        while True:
            ex = []
            if p.peek("exists"):
                p.take()
                while p.tok.kind == "id" and p.tok.text not in KEYWORDS:
                    ex.append(p.ident("variable").text)
                p.take(".")
            disjuncts.append((tuple(ex), frozenset(p.atom_list())))
            if not p.peek("|"):
                break
            p.take("|")
    p.done()
    try:
        return CoherentAxiom(tuple(univ), frozenset(ant), tuple(disjuncts), name)
    except SyntaxError_ as exc:
        raise ParseError(str(exc), start.line, start.col) from None


def parse_formula(text: str, sig: Signature) -> Formula:
    p = _Parser(tokenize(text), sig)
    f = p.formula()
    p.done()
    return f


def parse_term(text: str, sig: Signature):
    p = _Parser(tokenize(text), sig)
    t = p.term()
    p.done()
    return t


def parse_equation(text: str, sig: Signature | None = None) -> list:
    """``s = t`` pairs separated by commas.

    Without a signature, ``f(...)`` declares f with that arity and ``c()``
    writes a constant.
    """
    p = _Parser(tokenize(text), (sig or Signature()).extended(True), infer=sig is None)
    pairs = []
    while True:
        s = p.term()
        p.take("=")
        pairs.append((s, p.term()))
        if not p.peek(","):
            break
        p.take(",")
    p.done()
    return pairs


def parse_condition(text: str, sig: Signature) -> Condition:
    """``x,y : P(x), Q(x,y)``; the colon may be omitted when there are no facts."""
    p = _Parser(tokenize(text), sig)
    vs = []
    if p.tok.kind == "id" and not p.peek(":"):
        vs.append(p.ident("variable").text)
        while p.peek(","):
            p.take(",")
            vs.append(p.ident("variable").text)
    atoms = []
    if p.peek(":"):
        p.take(":")
        if p.tok.kind != "end":
            atoms = p.atom_list()
    p.done()
    for a in atoms:
        if a.is_equality:
            raise ParseError("conditions cannot contain equations", 1, 1)
    try:
        return Condition.of(vs, atoms)
    except (ValueError, SyntaxError_) as exc:
        raise ParseError(str(exc), 1, 1) from None


__all__ = [
    "ParseError",
    "TheoryFile",
    "parse_condition",
    "parse_equation",
    "parse_formula",
    "parse_term",
    "parse_theory",
    "tokenize",
]
