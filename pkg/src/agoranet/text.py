"""Tokenization used everywhere a profile, query, or segment is scored.

One tokenizer for the whole runtime keeps capability profiles, KB
retrieval, and question routing mutually consistent: a term that survives
tokenization in an agent description will match the same term in a user
question.

Rules: ASCII-fold, lowercase, split on non-alphanumerics, drop tokens
shorter than two characters, drop stopwords. The two-character floor (not
three) is deliberate — domain tags like "hr" and "cv" are routing-critical
and must survive; the stopword list below absorbs the short function words
instead.
"""

from __future__ import annotations

from agoranet import _kernels

MIN_TOKEN_LEN = 2

# Fixed English stopword list. Frozen: changing it changes every profile,
# score, and golden transcript.
STOPWORDS = frozenset(
    """
    about above after again all am an and any are as at be because been
    before being below between both but by can cannot could did do does
    doing down during each few for from further had has have having he her
    here hers herself him himself his how if in into is it its itself just
    me more most my myself no nor not now of off on once only or other our
    ours ourselves out over own same she should so some such than that the
    their theirs them themselves then there these they this those through
    to too under until up us very was we were what when where which while
    who whom why will with would you your yours yourself yourselves
    """.split()
)


def tokenize(text: str) -> list[str]:
    """Token stream of ``text`` under the runtime-wide rules."""
    return _kernels.tokenize(text, STOPWORDS, MIN_TOKEN_LEN)


def token_set(text: str) -> set[str]:
    return set(tokenize(text))


def term_counts(text: str) -> dict[str, int]:
    """Occurrence count per surviving token."""
    return _kernels.count_terms(tokenize(text))


def slug(text: str, max_tokens: int = 4) -> str:
    """Identifier-shaped digest of ``text`` (used for memory fact keys)."""
    return "_".join(tokenize(text)[:max_tokens])
