"""Facilitators: decompose questions, dispatch to children, fuse answers.

A facilitator scores each question segment against its children's
announced capability profiles and sends the argmax child a sub-query.
Segments no child covers are first checked against the session facts the
twin attached; only what is still unknown goes back to the twin as a
single integration request — at most one round per request, so every
request terminates.

Facilitators nest: a sub-query landing on a facilitator-capable node runs
the same flow one level down.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

from agoranet import _kernels
from agoranet import text as text_mod
from agoranet.bus import Envelope, MessageKind
from agoranet.context import RuntimeContext
from agoranet.errors import ALL_CHILDREN_FAILED, INTEGRATION_TIMEOUT, UNRESOLVED
from agoranet.profiles import (
    CapabilityProfile,
    profile_from_body,
    profile_to_body,
    summarize_children,
)
from agoranet.twin import humanize

logger = logging.getLogger(__name__)

_CLAUSE_BREAK = re.compile(r"[.?!;]+")


def segment(question: str) -> list[str]:
    """Split a question at sentence breaks and content-bearing 'and's."""
    if not question.strip():
        raise ValueError("segment() requires a nonempty question")
    clauses = [c.strip() for c in _CLAUSE_BREAK.split(question) if c.strip()]
    segments: list[str] = []
    for clause in clauses:
        segments.extend(_split_on_and(clause))
    return segments or [question.strip()]


def _split_on_and(clause: str) -> list[str]:
    words = clause.split()
    for i, word in enumerate(words):
        if word.lower() == "and":
            left = " ".join(words[:i])
            right = " ".join(words[i + 1:])
            if text_mod.tokenize(left) and text_mod.tokenize(right):
                return [left] + _split_on_and(right)
    return [clause] if clause else []


def score(seg: str, profile: CapabilityProfile) -> float:
    """Fraction of the profile's total weight shared with the segment."""
    total = profile.total_weight()
    if total <= 0:
        return 0.0
    tokens = text_mod.token_set(seg)
    overlap = _kernels.weighted_overlap(profile.term_list, profile.weight_list, tokens)
    return overlap / total


@dataclass
class Assignment:
    index: int
    segment: str
    child: str
    score: float


@dataclass
class DecompositionPlan:
    request_id: str
    segments: list[str]
    assignments: list[Assignment]
    uncovered: list[tuple[int, str]]


def decompose(question: str, children: dict[str, CapabilityProfile],
              threshold: float, request_id: str = "") -> DecompositionPlan:
    """Assign each segment to its best-scoring child, or mark it uncovered.

    Ties break to the lexicographically smaller child name.
    """
    segments = segment(question)
    assignments: list[Assignment] = []
    uncovered: list[tuple[int, str]] = []
    for index, seg in enumerate(segments):
        best_child = None
        best_score = 0.0
        for name in sorted(children):
            s = score(seg, children[name])
            if s >= threshold and s > best_score:
                best_child, best_score = name, s
        if best_child is None:
            uncovered.append((index, seg))
        else:
            assignments.append(Assignment(index, seg, best_child, best_score))
    return DecompositionPlan(request_id=request_id, segments=segments,
                             assignments=assignments, uncovered=uncovered)


@dataclass
class _Pending:
    plan: DecompositionPlan
    origin: str
    origin_twin: str
    attrs: dict
    segment_echo: str  # echoed back upward so a parent can match the reply
    parts: dict[int, dict] = field(default_factory=dict)
    waiting: dict[tuple[str, str], list[int]] = field(default_factory=dict)
    waiting_count: int = 0
    integration_pending: list[tuple[int, str]] = field(default_factory=list)
    integration_used: bool = False
    timer_id: int | None = None
    done: bool = False


class Facilitator:
    def __init__(self, name: str, ctx: RuntimeContext, parent: str | None = None):
        self.name = name
        self.ctx = ctx
        self.parent = parent
        self.children_profiles: dict[str, CapabilityProfile] = {}
        self._pending: dict[str, _Pending] = {}

    def join(self):
        self.ctx.bus.register(self.name, self.handle, parent=self.parent)

    # --- envelope handling ---------------------------------------------

    def handle(self, env: Envelope):
        if env.kind in (MessageKind.USER_QUERY, MessageKind.SUB_QUERY):
            self._on_query(env)
        elif env.kind == MessageKind.ANSWER:
            self._on_child_answer(env)
        elif env.kind == MessageKind.ERROR_NOTICE:
            self._on_child_error(env)
        elif env.kind == MessageKind.INTEGRATION_RESPONSE:
            self._on_integration_response(env)
        elif env.kind == MessageKind.CAPABILITY_ANNOUNCE:
            self._on_announce(env)
        elif env.kind == MessageKind.JOIN_NOTIFY:
            pass  # membership is tracked through capability announcements
        else:
            logger.debug("%s ignoring %s", self.name, env.kind)

    # --- capability propagation --------------------------------------------

    def _on_announce(self, env: Envelope):
        profile = profile_from_body(env.body["profile"])
        self.children_profiles[env.sender] = profile
        ordered = [self.children_profiles[n] for n in sorted(self.children_profiles)]
        summary = summarize_children(ordered, self.name, self.ctx.options.profile_k)
        self.ctx.profiles.put(self.name, summary, recruitable=False)
        if self.parent:
            self.ctx.bus.post(self.name, self.parent, MessageKind.CAPABILITY_ANNOUNCE,
                              {"profile": profile_to_body(summary)}, env.request_id)

    # --- question intake ---------------------------------------------------

    def _on_query(self, env: Envelope):
        rid = env.request_id
        text = env.body.get("text", "")
        attrs = env.body.get("attrs", {})
        facts = env.body.get("facts", [])
        plan = decompose(text, self.children_profiles,
                         self.ctx.options.route_threshold, rid)
        state = _Pending(
            plan=plan,
            origin=env.sender,
            origin_twin=env.body.get("origin_twin", env.sender),
            attrs=attrs,
            segment_echo=env.body.get("segment", ""),
        )
        self._pending[rid] = state

        for a in plan.assignments:
            self._dispatch(rid, state, a.index, a.segment, a.child, a.segment)

        unresolved: list[tuple[int, str]] = []
        for index, seg in plan.uncovered:
            value = _fact_for_segment(facts, seg)
            if value is not None:
                state.parts[index] = {"kind": "memory", "segment": seg,
                                      "text": value, "citations": [],
                                      "confidence": 1.0}
            else:
                unresolved.append((index, seg))

        if unresolved:
            state.integration_pending = unresolved
            state.integration_used = True
            self.ctx.bus.post(self.name, state.origin_twin,
                              MessageKind.INTEGRATION_REQUEST,
                              {"segments": [seg for _, seg in unresolved]}, rid)
            due = self.ctx.bus.clock.tick + self.ctx.options.integration_budget
            state.timer_id = self.ctx.bus.at(due, lambda: self._on_timeout(rid))
        self._check_complete(rid, state)

    def _dispatch(self, rid: str, state: _Pending, index: int,
                  query_text: str, child: str, original_segment: str):
        state.waiting.setdefault((child, original_segment), []).append(index)
        state.waiting_count += 1
        self.ctx.bus.post(self.name, child, MessageKind.SUB_QUERY,
                          {"text": query_text, "attrs": state.attrs,
                           "segment": original_segment,
                           "origin_twin": state.origin_twin}, rid)

    # --- child replies ---------------------------------------------------------

    def _take_waiting(self, state: _Pending, child: str, seg: str) -> int | None:
        key = (child, seg)
        indices = state.waiting.get(key)
        if not indices:
            # bus-synthesized bounces carry no segment; match by child alone
            for (c, _), idxs in sorted(state.waiting.items()):
                if c == child and idxs:
                    indices = idxs
                    break
        if not indices:
            return None
        state.waiting_count -= 1
        return indices.pop(0)

    def _on_child_answer(self, env: Envelope):
        state = self._pending.get(env.request_id)
        if state is None or state.done:
            return
        index = self._take_waiting(state, env.sender, env.body.get("segment", ""))
        if index is None:
            return
        state.parts[index] = {
            "kind": "answer",
            "segment": state.plan.segments[index],
            "text": env.body.get("text", ""),
            "citations": list(env.body.get("citations", [])),
            "confidence": float(env.body.get("confidence", 0.0)),
        }
        self._check_complete(env.request_id, state)

    def _on_child_error(self, env: Envelope):
        state = self._pending.get(env.request_id)
        if state is None or state.done:
            return
        index = self._take_waiting(state, env.sender, env.body.get("segment", ""))
        if index is None:
            return
        code = env.body.get("code", "default")
        state.parts[index] = {
            "kind": "error",
            "segment": state.plan.segments[index],
            "code": code,
            "detail": env.body.get("detail", ""),
            "text": humanize(code, env.body.get("detail", "")),
            "citations": [],
            "confidence": 0.0,
        }
        self._check_complete(env.request_id, state)

    # --- integration ------------------------------------------------------------

    def _on_integration_response(self, env: Envelope):
        rid = env.request_id
        state = self._pending.get(rid)
        if state is None or state.done:
            return
        if state.timer_id is not None:
            self.ctx.bus.cancel_timer(state.timer_id)
            state.timer_id = None
        reply = env.body.get("text", "")
        pending = state.integration_pending
        state.integration_pending = []
        for index, seg in pending:
            augmented = f"{seg} {reply}".strip()
            best_child = None
            best_score = 0.0
            for name in sorted(self.children_profiles):
                s = score(augmented, self.children_profiles[name])
                if s >= self.ctx.options.route_threshold and s > best_score:
                    best_child, best_score = name, s
            if best_child is None:
                state.parts[index] = {"kind": "unresolved", "segment": seg,
                                      "code": UNRESOLVED,
                                      "text": humanize(UNRESOLVED),
                                      "citations": [], "confidence": 0.0}
            else:
                state.plan.assignments.append(
                    Assignment(index, seg, best_child, best_score))
                self._dispatch(rid, state, index, augmented, best_child, seg)
        self._check_complete(rid, state)

    def _on_timeout(self, rid: str):
        state = self._pending.get(rid)
        if state is None or state.done or not state.integration_pending:
            return
        for index, seg in state.integration_pending:
            state.parts[index] = {"kind": "unresolved", "segment": seg,
                                  "code": INTEGRATION_TIMEOUT,
                                  "text": humanize(INTEGRATION_TIMEOUT),
                                  "citations": [], "confidence": 0.0}
        state.integration_pending = []
        self._check_complete(rid, state)

    # --- fusion -----------------------------------------------------------------

    def _check_complete(self, rid: str, state: _Pending):
        if state.done or state.waiting_count > 0 or state.integration_pending:
            return
        state.done = True
        self._pending.pop(rid, None)

        assigned_indices = {a.index for a in state.plan.assignments}
        assigned_parts = [state.parts[i] for i in sorted(assigned_indices)
                          if i in state.parts]
        if assigned_parts and all(p["kind"] == "error" for p in assigned_parts):
            self.ctx.bus.post(self.name, state.origin, MessageKind.ERROR_NOTICE,
                              {"code": ALL_CHILDREN_FAILED,
                               "detail": assigned_parts[0].get("detail", ""),
                               "segment": state.segment_echo}, rid)
            return

        ordered = [state.parts[i] for i in sorted(state.parts)]
        pieces = [f"[{p['segment']}] {p['text']}" for p in ordered]
        citations = sorted({c for p in ordered for c in p["citations"]})
        confidence = min((p["confidence"] for p in ordered), default=0.0)
        self.ctx.bus.post(self.name, state.origin, MessageKind.ANSWER,
                          {"text": "\n".join(pieces), "citations": citations,
                           "confidence": confidence,
                           "segment": state.segment_echo}, rid)


def _fact_for_segment(facts: list[dict], seg: str) -> str | None:
    """Newest attached fact whose key tokens overlap the segment."""
    seg_tokens = text_mod.token_set(seg)
    value = None
    for fact in facts:
        if text_mod.token_set(str(fact.get("key", ""))) & seg_tokens:
            value = str(fact.get("value", ""))
    return value
