"""Reasoner contract and the two shipped implementations.

A reasoner is the swappable "thinking" part of an agent. The contract is
deliberately narrow — answer a sub-query from accessible items, propose a
solution for a task, optionally revise given peers' work — and every
implementation must be deterministic: identical inputs, identical outputs.

The shipped reasoners are the lexical one (answers straight from retrieved
items) and the scripted one (lookup tables, used by the scenario harness
to replay fixed walkthroughs without any model).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from agoranet import text as text_mod
from agoranet.kb import KnowledgeItem


class Reasoner:
    """Behavior contract; subclasses must stay deterministic."""

    def answer(self, subquery: str,
               items: list[tuple[KnowledgeItem, float]]) -> tuple[str, list[str]]:
        """Answer text plus the ids of the items it actually used."""
        raise NotImplementedError

    def propose(self, task: str, agora_view: list[dict]) -> str | None:
        """Initial solution for a task; None opts out."""
        raise NotImplementedError

    def revise(self, own: str, peers: list[dict], round_no: int) -> str | None:
        """Revised solution, or None to keep the current one."""
        raise NotImplementedError


class LexicalReasoner(Reasoner):
    """Default: compose answers verbatim from the retrieved items."""

    def __init__(self, owner: str):
        self.owner = owner

    def answer(self, subquery, items):
        if not items:
            return "", []
        texts = [item.text for item, _ in items]
        return " ".join(texts), [item.id for item, _ in items]

    def propose(self, task, agora_view):
        return f"Initial approach from {self.owner}: {task}"

    def revise(self, own, peers, round_no):
        return None


@dataclass
class ReasonerScript:
    """Canned behavior table, loaded from a scenario file."""

    answers: list[dict] = field(default_factory=list)
    propose_seq: list[str] = field(default_factory=list)
    revise_seq: list[str] = field(default_factory=list)
    revise_always: str | None = None
    offline_for: int = 0  # first N sub-queries fail as unavailable
    offline: bool = False
    silent: bool = False  # never respond to recruit (exercises timeouts)

    @classmethod
    def from_dict(cls, raw: dict) -> "ReasonerScript":
        propose = raw.get("propose")
        if propose is None:
            propose_seq = []
        elif isinstance(propose, list):
            propose_seq = [str(p) for p in propose]
        else:
            propose_seq = [str(propose)]
        revise = raw.get("revise") or []
        if not isinstance(revise, list):
            revise = [revise]
        return cls(
            answers=list(raw.get("answers") or []),
            propose_seq=propose_seq,
            revise_seq=[str(r) for r in revise],
            revise_always=raw.get("revise_always"),
            offline_for=int(raw.get("offline_for") or 0),
            offline=bool(raw.get("offline")),
            silent=bool(raw.get("silent")),
        )


class ScriptedReasoner(Reasoner):
    """Lookup-table reasoner keyed by normalized sub-query tokens.

    Falls back to lexical behavior when no table entry matches, so a
    script only needs to pin the lines a walkthrough asserts on.
    """

    def __init__(self, owner: str, script: ReasonerScript):
        self.owner = owner
        self.script = script
        self._fallback = LexicalReasoner(owner)
        self._propose_calls = 0
        self._revise_calls = 0

    def answer(self, subquery, items):
        tokens = text_mod.token_set(subquery)
        accessible_ids = [item.id for item, _ in items]
        for entry in self.script.answers:
            match = str(entry.get("match", "*"))
            if match != "*" and not text_mod.token_set(match) <= tokens:
                continue
            cited = entry.get("cite")
            if cited is None:
                cited = accessible_ids
            else:
                cited = [c for c in cited if c in accessible_ids]
            return str(entry.get("text", "")), cited
        return self._fallback.answer(subquery, items)

    def propose(self, task, agora_view):
        seq = self.script.propose_seq
        if self.script.silent:
            return None
        if not seq:
            return self._fallback.propose(task, agora_view)
        idx = min(self._propose_calls, len(seq) - 1)
        self._propose_calls += 1
        return seq[idx]

    def revise(self, own, peers, round_no):
        if self.script.revise_always is not None:
            return self.script.revise_always.format(round=round_no)
        seq = self.script.revise_seq
        if self._revise_calls >= len(seq):
            return None
        out = seq[self._revise_calls]
        self._revise_calls += 1
        return out
