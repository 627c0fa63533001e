"""Plain-text rendering of verdicts, certificates and proofs."""

from __future__ import annotations

from . import forcing as F
from .coverage import derivation_lines
from .printer import format_formula
from .proofs import ProofTree


def _pad(n):
    return "  " * n


def witness_lines(w, n=0) -> list:
    p = _pad(n)
    if isinstance(w, F.TopW):
        return [f"{p}true"]
    if isinstance(w, (F.FactW, F.EqW, F.BotW)):
        label = {"FactW": "fact in every leg", "EqW": "equation in every leg", "BotW": "empty cover"}[type(w).__name__]
        return [f"{p}{label}"] + derivation_lines(w.deriv, n + 1)
    if isinstance(w, (F.OrW, F.ExistsW)):
        out = [f"{p}{'disjunction' if isinstance(w, F.OrW) else 'existential'} over cover"]
        out += derivation_lines(w.deriv, n + 1)
        for j, (tag, sub) in enumerate(w.legs):
            out.append(f"{p}  leg {j}: {'disjunct' if isinstance(w, F.OrW) else 'witness'} {tag}")
            out += witness_lines(sub, n + 2)
        return out
    if isinstance(w, F.AndW):
        out = [f"{p}conjunction"]
        for j, sub in enumerate(w.parts):
            out.append(f"{p}  part {j}")
            out += witness_lines(sub, n + 2)
        return out
    if isinstance(w, F.ImpliesW):
        head = f"{p}implication ({w.mode})"
        if w.antecedent is not None:
            head += f" assuming {format_formula(w.antecedent)}"
        if w.morphism is not None:
            head += f" along {w.morphism}"
        out = [head]
        if w.sub is not None:
            out += witness_lines(w.sub, n + 1)
        return out
    if isinstance(w, F.ForallW):
        out = [f"{p}universal, generic element {w.var}"]
        out += witness_lines(w.generic, n + 1)
        for t, sub in w.instances:
            out.append(f"{p}  instance {t}")
            out += witness_lines(sub, n + 2)
        return out
    if isinstance(w, F.ForallEnumW):
        return [f"{p}universal by enumeration, {len(w.entries)} instances checked"]
    return [f"{p}{w!r}"]


def countermodel_lines(cm, n=0) -> list:
    p = _pad(n)
    if isinstance(cm, (F.SaturatedBranch, F.StuckBranch)):
        kind = "saturated branch" if isinstance(cm, F.SaturatedBranch) else "closed branch"
        out = [f"{p}{kind}", f"{p}  root: {cm.root}"]
        for inst, i in cm.path:
            out.append(f"{p}  step {inst.label()} -> disjunct {i}")
        out.append(f"{p}  branch: {cm.branch}")
        new = sorted(map(str, cm.branch.atoms - cm.root.atoms))
        out.append(f"{p}  added facts: {', '.join(new) if new else '(none)'}")
        inert = sum(1 for e in cm.closure if e.inert)
        out.append(f"{p}  closure: {len(cm.closure)} instances ({inert} inert)")
        if isinstance(cm, F.StuckBranch):
            for f, sub in cm.refutations:
                out.append(f"{p}  not forced: {format_formula(f)}")
                out += countermodel_lines(sub, n + 2)
        return out
    if isinstance(cm, F.Refutation):
        out = [f"{p}refuted along {cm.morphism}"]
        if cm.term is not None:
            out.append(f"{p}  instance term: {cm.term}")
        if cm.antecedent is not None:
            out.append(f"{p}  antecedent forced")
        out += countermodel_lines(cm.consequent, n + 1)
        return out
    if isinstance(cm, F.ConjunctFailure):
        return [f"{p}conjunct {cm.index} fails"] + countermodel_lines(cm.countermodel, n + 1)
    if isinstance(cm, F.Rewritten):
        return [f"{p}rewritten as {format_formula(cm.rewritten)}"] + countermodel_lines(cm.countermodel, n + 1)
    return [f"{p}{cm!r}"]


def verdict_lines(v) -> list:
    if isinstance(v, F.Forced):
        return ["verdict: Forced"] + witness_lines(v.witness, 1)
    if isinstance(v, F.NotForced):
        return ["verdict: NotForced"] + countermodel_lines(v.countermodel, 1)
    return ["verdict: Unknown", f"  reason: {v.reason}"]


def proof_lines(p: ProofTree, n=0) -> list:
    data = ""
    if p.data:
        data = " [" + ", ".join(str(d) for d in p.data) + "]"
    hs = ", ".join(sorted(format_formula(h) for h in p.hyps))
    out = [f"{_pad(n)}{p.rule}{data}: {hs} |-[{','.join(sorted(p.ctx))}] {format_formula(p.concl)}"]
    for q in p.premises:
        out += proof_lines(q, n + 1)
    return out


__all__ = ["countermodel_lines", "proof_lines", "verdict_lines", "witness_lines"]
