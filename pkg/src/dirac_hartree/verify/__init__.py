"""Empirical consistency checks of the function-space inequalities."""

from .checks import HypothesisViolation
from .ensemble import Ensemble, build_descriptors, realize
from .report import VerificationReport, reports_to_csv
from .run import load_catalog, missing_lemmas, run_all, run_suite

__all__ = [
    "Ensemble",
    "HypothesisViolation",
    "VerificationReport",
    "build_descriptors",
    "load_catalog",
    "missing_lemmas",
    "realize",
    "reports_to_csv",
    "run_all",
    "run_suite",
]
