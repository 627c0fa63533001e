"""Forcing semantics for coherent theories over three syntactic sites."""

from .coverage import covers, pullback_cover
from .forcing import Bounds, Forced, NotForced, Unknown, check_countermodel, check_witness, force
from .parser import parse_condition, parse_formula, parse_theory
from .proofs import Sequent, check_proof, extract_proof, prove
from .sites import Condition, Morphism, SiteKind

__version__ = "0.1.0"

__all__ = [
    "Bounds",
    "Condition",
    "Forced",
    "Morphism",
    "NotForced",
    "Sequent",
    "SiteKind",
    "Unknown",
    "check_countermodel",
    "check_proof",
    "check_witness",
    "covers",
    "extract_proof",
    "force",
    "parse_condition",
    "parse_formula",
    "parse_theory",
    "prove",
    "pullback_cover",
]
