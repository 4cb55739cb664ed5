"""Exact-match scoring of structured outputs (SQL, labels, JSON)."""

from typing import Literal

Canonicalizer = Literal["verbatim", "whitespace_case_fold"]


def canonicalize(text: str, canonicalizer: Canonicalizer) -> str:
    """Canonical form used for comparison.

    ``verbatim`` leaves the text untouched; ``whitespace_case_fold`` trims,
    collapses inner whitespace runs and case-folds.
    """
    if canonicalizer == "verbatim":
        return text
    return " ".join(text.split()).casefold()


def structured_match_score(ref: str, hyp: str, canonicalizer: Canonicalizer = "verbatim") -> int:
    """1 when the canonical forms are equal, else 0."""
    return int(canonicalize(ref, canonicalizer) == canonicalize(hyp, canonicalizer))
