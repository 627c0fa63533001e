"""Replayable example corpus with expected verdicts and golden outputs."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .coverage import IsoBase, covers
from .equality import Discharged, girard_eriksson_reduce
from .forcing import Bounds, NotForced, Refutation, SaturatedBranch, check_verdict, force
from .parser import TheoryFile, parse_condition, parse_theory
from .proofs import Sequent, check_proof, prove
from .render import proof_lines, verdict_lines
from .sites import SiteKind

FIXTURES = Path(__file__).parent / "fixtures"


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    kind: str  # force | prove | covers | reduce
    theory: str
    site: str
    expect: str
    goal: str = ""
    condition: str = ":"
    bounds: dict = field(default_factory=dict)
    scope: str = "certified"  # or bounded-facet: only the stated finite facet is asserted
    note: str = ""
    expect_added: tuple = ()
    expect_refutation_domain: str = ""

    def make_bounds(self, doubled: bool = False) -> Bounds:
        b = Bounds(**self.bounds)
        return b.doubled() if doubled else b


@dataclass(frozen=True)
class EntryResult:
    name: str
    ok: bool
    expected: str
    got: str
    problems: tuple = ()
    output: tuple = ()


@dataclass
class CorpusReport:
    results: list

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)

    def text(self) -> str:
        lines = []
        for r in self.results:
            lines.append(f"{'PASS' if r.ok else 'FAIL'} {r.name}: expected {r.expected}, got {r.got}")
            for p in r.problems:
                lines.append(f"  - {p}")
        passed = sum(r.ok for r in self.results)
        lines.append(f"{passed}/{len(self.results)} entries passed")
        return "\n".join(lines) + "\n"


def load_manifest(directory: Path = FIXTURES) -> list:
    data = json.loads((Path(directory) / "manifest.json").read_text())
    out = []
    for e in data["entries"]:
        e = dict(e)
        e["expect_added"] = tuple(e.get("expect_added", ()))
        out.append(CorpusEntry(**e))
    return out


def _theory(directory: Path, name: str, cache: dict) -> TheoryFile:
    if name not in cache:
        cache[name] = parse_theory((Path(directory) / name).read_text())
    return cache[name]


def run_entry(entry: CorpusEntry, tf: TheoryFile, doubled: bool = False) -> EntryResult:
    problems = []
    b = entry.make_bounds(doubled)
    out = []
    if entry.kind == "force":
        kind = SiteKind.parse(entry.site)
        c = parse_condition(entry.condition, tf.signature)
        phi = tf.goal(entry.goal)
        v = force(kind, c, phi, tf.theory, b)
        got = v.status
        out = verdict_lines(v)
        if not check_verdict(kind, c, phi, tf.theory, v):
            problems.append("certificate does not re-check")
        if entry.expect_added and isinstance(v, NotForced):
            cm = v.countermodel
            if not isinstance(cm, SaturatedBranch):
                problems.append("expected a saturated branch")
            else:
                added = sorted(str(a) for a in cm.branch.atoms - cm.root.atoms)
                if added != sorted(entry.expect_added):
                    problems.append(f"branch adds {added}, expected {sorted(entry.expect_added)}")
        if entry.expect_refutation_domain and isinstance(v, NotForced):
            cm = v.countermodel
            want = parse_condition(entry.expect_refutation_domain, tf.signature)
            if not isinstance(cm, Refutation) or cm.morphism.dom != want:
                problems.append(f"refutation should start at {want}")
    elif entry.kind == "prove":
        kind = SiteKind.parse(entry.site)
        c = parse_condition(entry.condition, tf.signature)
        s = Sequent(c.vars, tuple(sorted(c.atoms, key=str)), tf.goal(entry.goal))
        r = prove(s, tf.theory, b, kind)
        got = r.status
        if r.proof is not None:
            chk = check_proof(r.proof, s, tf.theory)
            if not chk:
                problems.append(f"proof rejected at {chk.path}: {chk.reason}")
            out = [f"proof of {s} ({r.proof.size()} nodes)"] + proof_lines(r.proof)
        else:
            out = verdict_lines(r.verdict)
    elif entry.kind == "covers":
        c = parse_condition(entry.condition, tf.signature)
        sites = list(SiteKind) if entry.site == "all" else [SiteKind.parse(entry.site)]
        trivial = True
        for k in sites:
            ds = list(covers(c, tf.theory, k, b.cover_depth, b.term_depth))
            nontrivial = [d for d in ds if not isinstance(d, IsoBase)]
            out.append(f"{k}: {len(ds)} covers, {len(nontrivial)} non-trivial")
            trivial = trivial and not nontrivial
        got = "trivial" if trivial else "nontrivial"
    elif entry.kind == "reduce":
        phi = tf.goal(entry.goal)
        r = girard_eriksson_reduce(phi, tf.theory)
        if isinstance(r, Discharged):
            got = "discharged"
            out = [f"discharged: {r.failure}", f"  by {r.axiom}"]
        else:
            s = Sequent(frozenset(), (), r.goal)
            theory = tf.theory
            pr = prove(s, theory, b, SiteKind.parse(entry.site))
            got = f"reduced+{pr.status}"
            out = [f"reduced along {r.unifier} to {r.goal}"]
            if pr.proof is not None:
                chk = check_proof(pr.proof, s, theory)
                if not chk:
                    problems.append(f"proof rejected: {chk.reason}")
                out += proof_lines(pr.proof)
    else:
        raise ValueError(f"unknown entry kind {entry.kind}")
    if got != entry.expect:
        problems.append(f"verdict {got} differs from expected {entry.expect}")
    return EntryResult(entry.name, not problems, entry.expect, got, tuple(problems), tuple(out))


def run_corpus(directory: Path = FIXTURES, *, doubled: bool = False, golden: bool = True) -> CorpusReport:
    """Run every manifest entry; compare verdicts and, if `golden`, outputs."""
    directory = Path(directory)
    cache: dict = {}
    results = []
    for entry in load_manifest(directory):
        r = run_entry(entry, _theory(directory, entry.theory, cache), doubled)
        if golden and not doubled:
            path = directory / "expected" / f"{entry.name}.expected"
            text = "\n".join(r.output) + "\n"
            if not path.exists():
                r = _with_problem(r, "no expected-output file")
            elif path.read_text() != text:
                r = _with_problem(r, _first_diff(path.read_text(), text))
        results.append(r)
    return CorpusReport(results)


def _with_problem(r: EntryResult, msg: str) -> EntryResult:
    return EntryResult(r.name, False, r.expected, r.got, r.problems + (msg,), r.output)


def _first_diff(want: str, got: str) -> str:
    a, b = want.splitlines(), got.splitlines()
    for i, (x, y) in enumerate(zip(a, b), start=1):
        if x != y:
            return f"output line {i}: expected {x!r}, got {y!r}"
    return f"output has {len(b)} lines, expected {len(a)}"


def write_expected(directory: Path = FIXTURES) -> None:
    """Regenerate the golden outputs from the current implementation."""
    directory = Path(directory)
    cache: dict = {}
    (directory / "expected").mkdir(exist_ok=True)
    for entry in load_manifest(directory):
        r = run_entry(entry, _theory(directory, entry.theory, cache))
        (directory / "expected" / f"{entry.name}.expected").write_text("\n".join(r.output) + "\n")


__all__ = ["CorpusEntry", "CorpusReport", "EntryResult", "FIXTURES", "load_manifest", "run_corpus", "run_entry", "write_expected"]
