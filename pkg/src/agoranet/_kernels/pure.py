"""Pure-Python lexical kernels.

These four functions are the innermost loops of the runtime: every
capability profile, routing decision, and knowledge-base query funnels
through them. ``agoranet._kernels._speedups`` is a compiled twin with
identical semantics; this module is the reference implementation and the
import-time fallback.
"""

from __future__ import annotations

import unicodedata

BACKEND = "pure"


def fold_ascii(text: str) -> str:
    """Strip accents/compatibility forms down to plain ASCII."""
    return (
        unicodedata.normalize("NFKD", text)
        .encode("ascii", "ignore")
        .decode("ascii")
    )


def tokenize(text: str, stopwords: frozenset, min_len: int) -> list:
    """Lowercased alphanumeric tokens, short tokens and stopwords removed."""
    folded = fold_ascii(text).lower()
    tokens = []
    current = []
    for ch in folded:
        if ch.isalnum():
            current.append(ch)
        elif current:
            word = "".join(current)
            if len(word) >= min_len and word not in stopwords:
                tokens.append(word)
            current = []
    if current:
        word = "".join(current)
        if len(word) >= min_len and word not in stopwords:
            tokens.append(word)
    return tokens


def count_terms(tokens: list) -> dict:
    """Occurrence count per token, insertion-ordered by first appearance."""
    counts: dict = {}
    for tok in tokens:
        counts[tok] = counts.get(tok, 0) + 1
    return counts


def weighted_overlap(terms: list, weights: list, token_set: set) -> float:
    """Sum of weights of ``terms`` present in ``token_set``.

    ``terms`` and ``weights`` are parallel lists.
    """
    total = 0.0
    for i in range(len(terms)):
        if terms[i] in token_set:
            total += weights[i]
    return total


def merge_weights(profiles: list) -> dict:
    """Sum per-term weights across ``(terms, weights)`` pairs."""
    merged: dict = {}
    for terms, weights in profiles:
        for i in range(len(terms)):
            term = terms[i]
            merged[term] = merged.get(term, 0.0) + weights[i]
    return merged
