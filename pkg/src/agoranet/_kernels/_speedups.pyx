# cython: language_level=3
"""Compiled twin of ``agoranet._kernels.pure``.

Same contracts, same outputs, byte for byte; only the loops are typed.
Keep the two files in lockstep — the parity test suite diffs them on
random inputs.
"""

import unicodedata

BACKEND = "compiled"


def fold_ascii(text):
    return (
        unicodedata.normalize("NFKD", text)
        .encode("ascii", "ignore")
        .decode("ascii")
    )


def tokenize(text, stopwords, min_len):
    cdef str folded = fold_ascii(text).lower()
    cdef list tokens = []
    cdef list current = []
    cdef Py_ssize_t mlen = min_len
    cdef str ch, word
    for ch in folded:
        if ch.isalnum():
            current.append(ch)
        elif current:
            word = "".join(current)
            if len(word) >= mlen and word not in stopwords:
                tokens.append(word)
            del current[:]
    if current:
        word = "".join(current)
        if len(word) >= mlen and word not in stopwords:
            tokens.append(word)
    return tokens


def count_terms(tokens):
    cdef dict counts = {}
    for tok in tokens:
        counts[tok] = counts.get(tok, 0) + 1
    return counts


def weighted_overlap(terms, weights, token_set):
    cdef double total = 0.0
    cdef Py_ssize_t i, n = len(terms)
    for i in range(n):
        if terms[i] in token_set:
            total += <double>weights[i]
    return total


def merge_weights(profiles):
    cdef dict merged = {}
    cdef Py_ssize_t i, n
    for terms, weights in profiles:
        n = len(terms)
        for i in range(n):
            term = terms[i]
            merged[term] = merged.get(term, 0.0) + weights[i]
    return merged
