"""Condition-tagged knowledge items and least-privilege retrieval.

Retrieval is lexical (shared tokenizer, token-overlap scoring) so the
whole runtime stays deterministic; a richer scorer can replace it behind
the reasoner contract without touching the access-control path.

File format: one JSON object per line with fields
``{id, domain, text, condition}`` where ``condition`` is the expression
string understood by :mod:`agoranet.acl`.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from typing import Callable, Optional

from agoranet import text as text_mod
from agoranet.acl import RoleCondition, eval_condition, parse_condition, render_condition
from agoranet.errors import MalformedDocument


@dataclass(frozen=True)
class KnowledgeItem:
    id: str
    domain: str
    text: str
    condition: RoleCondition
    condition_text: str = ""
    terms: frozenset[str] = field(default_factory=frozenset)


def make_item(id: str, domain: str, text: str, condition: str) -> KnowledgeItem:
    return KnowledgeItem(
        id=id,
        domain=domain,
        text=text,
        condition=parse_condition(condition),
        condition_text=condition,
        terms=frozenset(text_mod.tokenize(text)),
    )


class KnowledgeBase:
    """Read-mostly item store; concurrent reads, exclusive writes."""

    def __init__(self, items: list[KnowledgeItem] | None = None):
        self._items: list[KnowledgeItem] = list(items or [])
        self._lock = threading.Lock()

    def add(self, item: KnowledgeItem):
        with self._lock:
            self._items.append(item)

    @property
    def items(self) -> list[KnowledgeItem]:
        return list(self._items)

    def for_domain(self, domain: str) -> list[KnowledgeItem]:
        return [i for i in self._items if i.domain == domain]

    @classmethod
    def from_jsonl(cls, content: str) -> "KnowledgeBase":
        items = []
        for lineno, line in enumerate(content.splitlines(), start=1):
            line = line.strip()
            if not line:
                continue
            try:
                d = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedDocument(f"kb line {lineno}: {exc}") from exc
            for key in ("id", "domain", "text", "condition"):
                if key not in d:
                    raise MalformedDocument(f"kb line {lineno}: missing {key!r}")
            items.append(make_item(d["id"], d["domain"], d["text"], d["condition"]))
        return cls(items)

    def to_jsonl(self) -> str:
        return "\n".join(
            json.dumps(
                {
                    "id": i.id,
                    "domain": i.domain,
                    "text": i.text,
                    "condition": i.condition_text or render_condition(i.condition),
                },
                separators=(",", ":"),
            )
            for i in self._items
        )


def kb_query(
    items: list[KnowledgeItem],
    query: str,
    attrs: dict[str, str],
    limit: int,
    on_denied: Optional[Callable[[KnowledgeItem], None]] = None,
) -> list[tuple[KnowledgeItem, float]]:
    """Accessible items ranked by token overlap with ``query``.

    Zero-overlap items never appear and never count as denied. An item
    that matches but whose condition fails is reported once through
    ``on_denied`` and excluded — the caller records the denial.
    """
    if limit < 1:
        raise ValueError("limit must be >= 1")
    query_tokens = text_mod.token_set(query)
    if not query_tokens:
        return []
    scored: list[tuple[float, str, KnowledgeItem]] = []
    for item in items:
        overlap = len(query_tokens & item.terms)
        if overlap == 0:
            continue
        score = overlap / len(query_tokens)
        if not eval_condition(item.condition, attrs):
            if on_denied is not None:
                on_denied(item)
            continue
        scored.append((score, item.id, item))
    scored.sort(key=lambda t: (-t[0], t[1]))
    return [(item, score) for score, _, item in scored[:limit]]
