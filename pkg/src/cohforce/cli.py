"""Command-line interface.

Exit status: 0 Forced / proved / pass, 1 NotForced / refuted / fail,
2 Unknown, 3 usage or parse error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .corpus import FIXTURES, run_corpus
from .coverage import covers, derivation_lines
from .forcing import Bounds, ForcingError, force
from .parser import ParseError, parse_condition, parse_equation, parse_formula, parse_theory
from .printer import format_formula
from .proofs import ProofError, Sequent, check_proof, prove
from .render import proof_lines, verdict_lines
from .serialize import dumps, encode
from .sites import SiteKind
from .unify import Failure, mgu

EXIT = {"Forced": 0, "proved": 0, "pass": 0, "NotForced": 1, "refuted": 1, "fail": 1, "Unknown": 2, "unknown": 2}
USAGE_ERROR = 3


class _ArgParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def _bounds_args(p):
    p.add_argument("--depth", type=int, default=3, help="cover depth (chase rounds)")
    p.add_argument("--fresh", type=int, default=2, help="fresh variables per branch / morphism")
    p.add_argument("--atoms", type=int, default=1, help="extra facts in enumerated morphisms")
    p.add_argument("--term-depth", type=int, default=1, help="depth of enumerated terms")


def _goal_args(p):
    p.add_argument("--theory", required=True, help="theory file")
    p.add_argument("--condition", default=":", help='condition literal, e.g. "x,y : P(x)"')
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--goal", help="name of a goal in the theory file")
    g.add_argument("--formula", help="formula text")


def build_parser() -> argparse.ArgumentParser:
    ap = _ArgParser(prog="cohforce", description="Forcing, covers and proofs for coherent theories.")
    ap.add_argument("--format", choices=("text", "structured"), default="text")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_ArgParser)

    p = sub.add_parser("force", help="decide whether a condition forces a formula")
    p.add_argument("--site", choices=("rn", "vs", "ts"), required=True)
    _goal_args(p)
    _bounds_args(p)
    p.add_argument("--enumerate", action="store_true", help="check universals by enumerating morphisms")

    p = sub.add_parser("prove", help="search for a proof of an atomic-hypothesis sequent")
    p.add_argument("--site", choices=("rn", "vs", "ts"), default="ts")
    _goal_args(p)
    _bounds_args(p)

    p = sub.add_parser("covers", help="list cover derivations of a condition")
    p.add_argument("--site", choices=("rn", "vs", "ts"), default="vs")
    p.add_argument("--theory", required=True)
    p.add_argument("--condition", default=":")
    p.add_argument("--depth", type=int, default=1)
    p.add_argument("--term-depth", type=int, default=0)

    p = sub.add_parser("unify", help="most general unifier of equations")
    p.add_argument("equations", help='e.g. "f(x) = f(y), y = g(z)"')
    p.add_argument("--theory", help="take function symbols from this theory")

    p = sub.add_parser("corpus", help="replay the example corpus")
    p.add_argument("--dir", default=str(FIXTURES))
    p.add_argument("--doubled", action="store_true", help="double every bound (verdicts only)")
    return ap


def _load(path):
    return parse_theory(Path(path).read_text())


def _formula(args, tf):
    if args.goal:
        return tf.goal(args.goal)
    return parse_formula(args.formula, tf.signature)


def _bounds(args):
    return Bounds(cover_depth=args.depth, fresh_vars=args.fresh, atom_budget=args.atoms, term_depth=args.term_depth)


def _emit(args, status, text_lines, data):
    if args.format == "structured":
        out = {"command": args.command, "status": status}
        out.update(data)
        print(dumps(out))
    else:
        print("\n".join(text_lines))
    return EXIT[status]


def cmd_force(args):
    tf = _load(args.theory)
    kind = SiteKind.parse(args.site)
    c = parse_condition(args.condition, tf.signature)
    phi = _formula(args, tf)
    v = force(kind, c, phi, tf.theory, _bounds(args), forall_shortcut=not args.enumerate)
    head = [f"site: {kind}", f"condition: {c}", f"goal: {format_formula(phi)}"]
    data = {"site": str(kind), "condition": c.literal(), "goal": format_formula(phi), "verdict": encode(v)}
    return _emit(args, v.status, head + verdict_lines(v), data)


def cmd_prove(args):
    tf = _load(args.theory)
    c = parse_condition(args.condition, tf.signature)
    s = Sequent(c.vars, tuple(sorted(c.atoms, key=str)), _formula(args, tf))
    r = prove(s, tf.theory, _bounds(args), SiteKind.parse(args.site))
    lines = [f"sequent: {s}", f"status: {r.status}"]
    data = {"sequent": str(s)}
    if r.proof is not None:
        chk = check_proof(r.proof, s, tf.theory)
        lines.append(f"checked: {'yes' if chk else 'no: ' + chk.reason}")
        lines += proof_lines(r.proof)
        data["checked"] = bool(chk)
        data["proof"] = encode(r.proof)
    else:
        lines += verdict_lines(r.verdict)
        data["verdict"] = encode(r.verdict)
    return _emit(args, r.status, lines, data)


def cmd_covers(args):
    tf = _load(args.theory)
    kind = SiteKind.parse(args.site)
    c = parse_condition(args.condition, tf.signature)
    ds = list(covers(c, tf.theory, kind, args.depth, args.term_depth))
    lines = [f"{len(ds)} cover derivations of {c} in {kind} up to depth {args.depth}"]
    items = []
    for i, d in enumerate(ds):
        legs = [str(f.dom) for f in d.leaves()]
        lines.append(f"[{i}] {len(legs)} legs: {' ; '.join(legs) if legs else '(empty)'}")
        lines += derivation_lines(d, 1)
        items.append({"legs": legs, "derivation": derivation_lines(d)})
    return _emit(args, "pass", lines, {"condition": c.literal(), "covers": items})


def cmd_unify(args):
    sig = _load(args.theory).signature if args.theory else None
    pairs = parse_equation(args.equations, sig)
    u = mgu(pairs)
    if isinstance(u, Failure):
        data = {"unifiable": False, "reason": u.tag, "left": str(u.left), "right": str(u.right)}
        return _emit(args, "fail", [f"not unifiable: {u}"], data)
    subst = {v: str(t) for v, t in u.subst}
    return _emit(args, "pass", [f"mgu: {u}"], {"unifiable": True, "mgu": subst})


def cmd_corpus(args):
    rep = run_corpus(Path(args.dir), doubled=args.doubled)
    data = {
        "entries": [
            {"name": r.name, "ok": r.ok, "expected": r.expected, "got": r.got, "problems": list(r.problems)}
            for r in rep.results
        ]
    }
    return _emit(args, "pass" if rep.ok else "fail", [rep.text().rstrip("\n")], data)


COMMANDS = {"force": cmd_force, "prove": cmd_prove, "covers": cmd_covers, "unify": cmd_unify, "corpus": cmd_corpus}


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_ERROR
    try:
        return COMMANDS[args.command](args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
    except (OSError, KeyError, ForcingError, ProofError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
