"""Vocabulary overlap diagnostic."""

from __future__ import annotations

from .base import Tokenizer


def vocab_overlap(a: Tokenizer, b: Tokenizer) -> float:
    """Jaccard overlap of the two tokenizers' native piece strings."""
    sa, sb = a.token_strings(), b.token_strings()
    union = sa | sb
    if not union:
        return 1.0
    return len(sa & sb) / len(union)
