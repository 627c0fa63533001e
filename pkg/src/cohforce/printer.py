"""Printing in the concrete theory-language syntax (re-parseable)."""

from __future__ import annotations

from .syntax import (
    And,
    Atom,
    Bot,
    CoherentAxiom,
    Exists,
    Forall,
    Formula,
    Implies,
    Or,
    Top,
)

# binding strength: quantifier < -> < | < & < atomic
_Q, _IMP, _OR, _AND, _ATOM = range(5)


def format_atom(a: Atom) -> str:
    if a.is_equality:
        return f"{a.args[0]} = {a.args[1]}"
    if not a.args:
        return a.pred
    return f"{a.pred}({','.join(str(t) for t in a.args)})"


def _prec(f: Formula) -> int:
    if isinstance(f, (Forall, Exists)):
        return _Q
    if isinstance(f, Implies):
        return _IMP
    if isinstance(f, Or) and len(f.parts) >= 2:
        return _OR
    if isinstance(f, And) and len(f.parts) >= 2:
        return _AND
    return _ATOM


def _fmt(f: Formula, ctx: int) -> str:
    s = _raw(f)
    return f"({s})" if _prec(f) < ctx else s


def _raw(f: Formula) -> str:
    if isinstance(f, Atom):
        return format_atom(f)
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Bot):
        return "false"
    if isinstance(f, And):
        if len(f.parts) == 0:
            return "true"
        if len(f.parts) == 1:
            return _raw(f.parts[0])
        return " & ".join(_fmt(p, _AND + 1) for p in f.parts)
    if isinstance(f, Or):
        if len(f.parts) == 0:
            return "false"
        if len(f.parts) == 1:
            return _raw(f.parts[0])
        return " | ".join(_fmt(p, _OR + 1) for p in f.parts)
    if isinstance(f, Implies):
        return f"{_fmt(f.ant, _IMP + 1)} -> {_fmt(f.cons, _IMP)}"
    if isinstance(f, (Forall, Exists)):
        kind = type(f)
        names = []
        while isinstance(f, kind):
            names.append(f.var)
            f = f.body
        word = "forall" if kind is Forall else "exists"
        return f"{word} {' '.join(names)}. {_fmt(f, _Q)}"
    raise TypeError(f"not a formula: {f!r}")


def format_formula(f: Formula) -> str:
    return _raw(f)


def format_axiom(ax: CoherentAxiom) -> str:
    head = f"forall {' '.join(ax.univ)}. " if ax.univ else ""
    ant = ", ".join(sorted(format_atom(a) for a in ax.antecedent)) or "true"
    if not ax.disjuncts:
        cons = "false"
    else:
        parts = []
        for ex, atoms in ax.disjuncts:
            body = ", ".join(sorted(format_atom(a) for a in atoms)) or "true"
            parts.append(f"exists {' '.join(ex)}. {body}" if ex else body)
        cons = " | ".join(parts)
    return f"{head}{ant} => {cons}"
