"""JSON-ready encodings of verdicts, certificates and proofs.

Every object becomes nested dicts with a ``type`` tag and a fixed key
order; formulas, terms and conditions are stored in the concrete syntax
and re-parsed on decoding, so a decoded certificate can be re-checked.
"""

from __future__ import annotations

import json

from . import forcing as F
from .coverage import AxiomInstance, AxiomStep, IsoBase
from .parser import parse_condition, parse_formula, parse_term
from .printer import format_formula
from .proofs import ProofTree
from .sites import Morphism
from .syntax import Theory


class DecodeError(ValueError):
    pass


def dumps(data) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False)


# ---------------------------------------------------------------- encode


def _cond(c):
    return c.literal()


def _mor(m: Morphism):
    return {"dom": _cond(m.dom), "cod": _cond(m.cod), "subst": {v: str(t) for v, t in m.subst}}


def _inst(i: AxiomInstance):
    return {"axiom": i.index, "target": _cond(i.target), "inst": {v: str(t) for v, t in i.inst}}


def _deriv(d):
    if isinstance(d, IsoBase):
        return {"type": "iso", "root": _cond(d.root), "iso": _mor(d.iso)}
    return {
        "type": "step",
        "root": _cond(d.root),
        "instance": _inst(d.instance),
        "children": [_deriv(c) for c in d.children],
    }


def encode(obj):
    """Encode a verdict, witness, countermodel or proof tree."""
    if isinstance(obj, F.Forced):
        return {"type": "Forced", "witness": encode(obj.witness)}
    if isinstance(obj, F.NotForced):
        return {"type": "NotForced", "countermodel": encode(obj.countermodel)}
    if isinstance(obj, F.Unknown):
        return {"type": "Unknown", "reason": obj.reason}
    if isinstance(obj, F.TopW):
        return {"type": "TopW"}
    if isinstance(obj, (F.FactW, F.EqW, F.BotW)):
        return {"type": type(obj).__name__, "deriv": _deriv(obj.deriv)}
    if isinstance(obj, F.OrW):
        return {"type": "OrW", "deriv": _deriv(obj.deriv), "legs": [[i, encode(w)] for i, w in obj.legs]}
    if isinstance(obj, F.ExistsW):
        return {"type": "ExistsW", "deriv": _deriv(obj.deriv), "legs": [[str(t), encode(w)] for t, w in obj.legs]}
    if isinstance(obj, F.AndW):
        return {"type": "AndW", "parts": [encode(p) for p in obj.parts]}
    if isinstance(obj, F.ImpliesW):
        out = {"type": "ImpliesW", "mode": obj.mode}
        if obj.sub is not None:
            out["sub"] = encode(obj.sub)
        if obj.antecedent is not None:
            out["antecedent"] = format_formula(obj.antecedent)
        if obj.morphism is not None:
            out["morphism"] = _mor(obj.morphism)
        if obj.rewritten is not None:
            out["rewritten"] = format_formula(obj.rewritten)
        return out
    if isinstance(obj, F.ForallW):
        return {
            "type": "ForallW",
            "var": obj.var,
            "generic": encode(obj.generic),
            "instances": [[str(t), encode(w)] for t, w in obj.instances],
        }
    if isinstance(obj, F.ForallEnumW):
        return {
            "type": "ForallEnumW",
            "var": obj.var,
            "entries": [[_mor(f), str(t), encode(w)] for f, t, w in obj.entries],
        }
    if isinstance(obj, F.ClosureEntry):
        return {
            "instance": _inst(obj.instance),
            "disjunct": obj.disjunct,
            "witnesses": {v: str(t) for v, t in obj.witnesses},
            "inert": obj.inert,
        }
    if isinstance(obj, (F.SaturatedBranch, F.StuckBranch)):
        out = {
            "type": type(obj).__name__,
            "root": _cond(obj.root),
            "branch": _cond(obj.branch),
            "path": [[_inst(i), k] for i, k in obj.path],
            "closure": [encode(e) for e in obj.closure],
        }
        if isinstance(obj, F.StuckBranch):
            out["refutations"] = [[format_formula(p), encode(cm)] for p, cm in obj.refutations]
        return out
    if isinstance(obj, F.Refutation):
        out = {"type": "Refutation", "morphism": _mor(obj.morphism)}
        if obj.term is not None:
            out["term"] = str(obj.term)
        if obj.antecedent is not None:
            out["antecedent"] = encode(obj.antecedent)
        out["consequent"] = encode(obj.consequent)
        return out
    if isinstance(obj, F.ConjunctFailure):
        return {"type": "ConjunctFailure", "index": obj.index, "countermodel": encode(obj.countermodel)}
    if isinstance(obj, F.Rewritten):
        return {"type": "Rewritten", "rewritten": format_formula(obj.rewritten), "countermodel": encode(obj.countermodel)}
    if isinstance(obj, ProofTree):
        return {
            "rule": obj.rule,
            "ctx": sorted(obj.ctx),
            "hyps": sorted(format_formula(h) for h in obj.hyps),
            "concl": format_formula(obj.concl),
            "data": [_datum(d) for d in obj.data],
            "premises": [encode(p) for p in obj.premises],
        }
    raise TypeError(f"cannot encode {type(obj).__name__}")


def _datum(d):
    if isinstance(d, (int, str)):
        return d
    return {"term": str(d)}


# ---------------------------------------------------------------- decode


class Decoder:
    def __init__(self, theory: Theory):
        self.theory = theory
        self.sig = theory.signature.extended(True) if theory.signature.with_equality else theory.signature

    def cond(self, s):
        return parse_condition(s, self.sig)

    def term(self, s):
        return parse_term(s, self.sig)

    def formula(self, s):
        return parse_formula(s, self.sig)

    def mor(self, d):
        return Morphism.make(self.cond(d["dom"]), self.cond(d["cod"]), {v: self.term(t) for v, t in d["subst"].items()})

    def inst(self, d):
        idx = d["axiom"]
        ax = self.theory.axioms[idx]
        pairs = tuple((v, self.term(d["inst"][v])) for v in ax.univ)
        return AxiomInstance(ax, idx, self.cond(d["target"]), pairs)

    def deriv(self, d):
        if d["type"] == "iso":
            return IsoBase(self.cond(d["root"]), self.mor(d["iso"]))
        return AxiomStep(self.cond(d["root"]), self.inst(d["instance"]), tuple(self.deriv(c) for c in d["children"]))

    def decode(self, d):
        try:
            return self._decode(d)
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise DecodeError(str(exc)) from None

    def _decode(self, d):
        if "rule" in d:
            return ProofTree(
                d["rule"],
                frozenset(d["ctx"]),
                frozenset(self.formula(h) for h in d["hyps"]),
                self.formula(d["concl"]),
                tuple(self._decode(p) for p in d["premises"]),
                tuple(self.term(x["term"]) if isinstance(x, dict) else x for x in d["data"]),
            )
        t = d.get("type")
        dec = self._decode
        if t == "Forced":
            return F.Forced(dec(d["witness"]))
        if t == "NotForced":
            return F.NotForced(dec(d["countermodel"]))
        if t == "Unknown":
            return F.Unknown(d["reason"])
        if t == "TopW":
            return F.TopW()
        if t in ("FactW", "EqW", "BotW"):
            return getattr(F, t)(self.deriv(d["deriv"]))
        if t == "OrW":
            return F.OrW(self.deriv(d["deriv"]), tuple((i, dec(w)) for i, w in d["legs"]))
        if t == "ExistsW":
            return F.ExistsW(self.deriv(d["deriv"]), tuple((self.term(s), dec(w)) for s, w in d["legs"]))
        if t == "AndW":
            return F.AndW(tuple(dec(p) for p in d["parts"]))
        if t == "ImpliesW":
            return F.ImpliesW(
                d["mode"],
                dec(d["sub"]) if "sub" in d else None,
                self.formula(d["antecedent"]) if "antecedent" in d else None,
                self.mor(d["morphism"]) if "morphism" in d else None,
                self.formula(d["rewritten"]) if "rewritten" in d else None,
            )
        if t == "ForallW":
            return F.ForallW(d["var"], dec(d["generic"]), tuple((self.term(s), dec(w)) for s, w in d["instances"]))
        if t == "ForallEnumW":
            return F.ForallEnumW(
                d["var"], tuple((self.mor(f), self.term(s), dec(w)) for f, s, w in d["entries"])
            )
        if t in ("SaturatedBranch", "StuckBranch"):
            root, branch = self.cond(d["root"]), self.cond(d["branch"])
            path = tuple((self.inst(i), k) for i, k in d["path"])
            closure = tuple(
                F.ClosureEntry(
                    self.inst(e["instance"]),
                    e["disjunct"],
                    tuple((v, self.term(s)) for v, s in e["witnesses"].items()),
                    e["inert"],
                )
                for e in d["closure"]
            )
            if t == "SaturatedBranch":
                return F.SaturatedBranch(root, branch, path, closure)
            refs = tuple((self.formula(p), dec(cm)) for p, cm in d["refutations"])
            return F.StuckBranch(root, branch, path, closure, refs)
        if t == "Refutation":
            return F.Refutation(
                self.mor(d["morphism"]),
                self.term(d["term"]) if "term" in d else None,
                dec(d["antecedent"]) if "antecedent" in d else None,
                dec(d["consequent"]),
            )
        if t == "ConjunctFailure":
            return F.ConjunctFailure(d["index"], dec(d["countermodel"]))
        if t == "Rewritten":
            return F.Rewritten(self.formula(d["rewritten"]), dec(d["countermodel"]))
        raise DecodeError(f"unknown type tag {t!r}")


def decode(data, theory: Theory):
    return Decoder(theory).decode(data)


__all__ = ["DecodeError", "Decoder", "decode", "dumps", "encode"]
