"""Syntactic unification by transformation rules (Martelli-Montanari)."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

from .syntax import App, Term, Var, occurs, subst_term, term_vars


@dataclass(frozen=True)
class Failure:
    """Why a system has no unifier.

    ``Clash`` (distinct head symbols or arities) corresponds to constructor
    axiom (I); ``OccursCheck`` (a proper cycle x = ...x...) to axiom (III).
    """

    tag: str
    left: Term
    right: Term

    def __bool__(self) -> bool:
        return False

    def __str__(self) -> str:
        return f"{self.tag}: {self.left} = {self.right}"


@dataclass(frozen=True)
class Unifier:
    subst: tuple  # sorted (var, term); identity elsewhere

    @cached_property
    def mapping(self) -> dict:
        return dict(self.subst)

    def apply(self, t: Term) -> Term:
        return subst_term(t, self.mapping)

    def on(self, variables: Iterable[str]) -> dict:
        """The substitution made total on `variables`."""
        m = self.mapping
        return {v: m.get(v, Var(v)) for v in variables}

    def codomain_vars(self, variables: Iterable[str]) -> frozenset:
        out: set = set()
        for t in self.on(variables).values():
            out |= term_vars(t)
        return frozenset(out)

    def is_idempotent(self) -> bool:
        m = self.mapping
        return all(subst_term(t, m) == t for t in m.values())

    def unifies(self, pairs) -> bool:
        return all(self.apply(s) == self.apply(t) for s, t in pairs)

    def is_variable_valued(self) -> bool:
        return all(isinstance(t, Var) for _, t in self.subst)

    def __str__(self) -> str:
        return "[" + ",".join(f"{v}:={t}" for v, t in self.subst) + "]"


def mgu(pairs: Iterable[tuple]) -> Unifier | Failure:
    """Most general unifier of a finite system of term equations."""
    todo = list(pairs)
    solved: dict = {}
    while todo:
        s, t = todo.pop(0)
        if s == t:
            continue  # delete
        if isinstance(s, App) and isinstance(t, App):
            if s.fn != t.fn or len(s.args) != len(t.args):
                return Failure("Clash", s, t)
            todo = list(zip(s.args, t.args)) + todo  # decompose
            continue
        if not isinstance(s, Var):
            s, t = t, s  # orient
        if occurs(s.name, t):
            return Failure("OccursCheck", s, t)
        # eliminate
        bind = {s.name: t}
        todo = [(subst_term(a, bind), subst_term(b, bind)) for a, b in todo]
        solved = {v: subst_term(u, bind) for v, u in solved.items()}
        solved[s.name] = t
    return Unifier(tuple(sorted(solved.items())))
