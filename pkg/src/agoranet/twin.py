"""The digital twin: the user's agent inside the network.

It classifies each user message as a question (routed to a facilitator)
or a task (routed to a freshly spawned mediator), enriches outgoing
requests with matching session facts, translates machine error codes into
plain language, and stores failed requests for resubmission with capped
exponential backoff.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from importlib import resources

from agoranet import text as text_mod
from agoranet.bus import Envelope, MessageKind, TraceAction
from agoranet.context import RuntimeContext
from agoranet.errors import DEFERRABLE_CODES, NoOutstandingIntegration, RETRIES_EXHAUSTED

logger = logging.getLogger(__name__)

# First-word imperatives that mark a message as a task for a mediator
# rather than a question for a facilitator.
TASK_VERBS = frozenset(
    {
        "create", "prepare", "draft", "schedule",
        "write", "compose", "organize", "organise",
        "generate", "plan", "make", "build", "arrange", "produce",
    }
)


def _load_templates() -> dict[str, str]:
    raw = resources.files("agoranet.data").joinpath("error_templates.json").read_text()
    return json.loads(raw)


_TEMPLATES: dict[str, str] | None = None


def error_templates() -> dict[str, str]:
    global _TEMPLATES
    if _TEMPLATES is None:
        _TEMPLATES = _load_templates()
    return _TEMPLATES


def service_display_name(detail: str) -> str:
    """'hr-domain' -> 'HR'; used by the unavailable-service template."""
    name = detail or "requested"
    if name.endswith("-domain"):
        name = name[: -len("-domain")]
    return name.upper() if len(name) <= 3 else name.title()


def humanize(code: str, detail: str = "") -> str:
    """Plain-language text for a machine error code; never technical."""
    table = error_templates()
    template = table.get(code, table["default"])
    return template.format(detail=detail, service=service_display_name(detail))


@dataclass
class SessionMemory:
    session_id: str
    facts: list[tuple[str, str, int]] = field(default_factory=list)  # key, value, tick
    history: list[tuple[str, str, str]] = field(default_factory=list)

    def store(self, key: str, value: str, tick: int = 0):
        self.facts.append((key, value, tick))

    def recall(self, key: str) -> str | None:
        for k, v, _ in reversed(self.facts):
            if k == key:
                return v
        return None

    def matching_facts(self, tokens: set[str]) -> list[tuple[str, str]]:
        """Newest fact per key whose key tokens overlap ``tokens``."""
        out: dict[str, str] = {}
        for key, value, _ in self.facts:
            if text_mod.token_set(key) & tokens:
                out[key] = value  # later entries win
        return list(out.items())


@dataclass
class DeferredRequest:
    request_id: str
    text: str
    attempts: int = 0
    anchor: int = 0  # tick the backoff for the next retry counts from
    next_due: int = 0


def classify_message(message: str) -> str:
    """'task' when the first word is an imperative from the lexicon."""
    words = message.split()
    first = "".join(ch for ch in words[0].lower() if ch.isalnum()) if words else ""
    return "task" if first in TASK_VERBS else "question"


class DigitalTwin:
    def __init__(self, name: str, ctx: RuntimeContext, session: SessionMemory,
                 attrs: dict[str, str], facilitator: str | None):
        self.name = name
        self.ctx = ctx
        self.session = session
        self.attrs = dict(attrs)
        self.facilitator = facilitator
        self._pending: dict[str, dict] = {}
        self._deferred: dict[str, DeferredRequest] = {}
        self._prompts: dict[str, dict] = {}

    # --- user entry point -------------------------------------------------

    def receive_user_text(self, message: str) -> str | None:
        """Route one user message; returns its request id, or None if rejected."""
        if not message or not message.strip():
            self._emit("notice", "", humanize("EmptyMessage"), code="EmptyMessage")
            return None
        request_id = self.ctx.new_request_id()
        self._emit("user", request_id, message)
        self._pending[request_id] = {"text": message, "done": False}
        self._route(request_id, message)
        return request_id

    def _route(self, request_id: str, message: str):
        kind = classify_message(message)
        body = {
            "text": message,
            "attrs": self.attrs,
            "facts": self._matching_facts(message),
            "origin_twin": self.name,
        }
        if kind == "task":
            mediator = self.ctx.spawn_mediator() if self.ctx.spawn_mediator else None
            if mediator is None:
                self._finish(request_id, "failure", humanize("NoUpstream"), code="NoUpstream")
                return
            self.ctx.bus.post(self.name, mediator, MessageKind.TASK_REQUEST,
                              body, request_id)
        else:
            if not self.facilitator:
                self._finish(request_id, "failure", humanize("NoUpstream"), code="NoUpstream")
                return
            self.ctx.bus.post(self.name, self.facilitator, MessageKind.USER_QUERY,
                              body, request_id)

    def _matching_facts(self, message: str) -> list[dict]:
        tokens = text_mod.token_set(message)
        return [{"key": k, "value": v} for k, v in self.session.matching_facts(tokens)]

    # --- memory -----------------------------------------------------------

    def memory_store(self, key: str, value: str):
        self.session.store(key, value, self.ctx.bus.clock.tick)

    def memory_recall(self, key: str) -> str | None:
        return self.session.recall(key)

    # --- envelope handling ---------------------------------------------------

    def handle(self, env: Envelope):
        if env.kind == MessageKind.ANSWER:
            self._on_answer(env)
        elif env.kind == MessageKind.ERROR_NOTICE:
            self._on_error(env)
        elif env.kind == MessageKind.INTEGRATION_REQUEST:
            self._on_integration_request(env)
        elif env.kind == MessageKind.PUBLISH:
            self._on_publish(env)
        elif env.kind == MessageKind.ACK:
            self._emit("notice", env.request_id, humanize("TaskAccepted"),
                       code="TaskAccepted")
        else:
            logger.debug("twin ignoring %s", env.kind)

    def _on_answer(self, env: Envelope):
        rid = env.request_id
        state = self._pending.get(rid)
        if state is None or state["done"]:
            return
        body = env.body
        self._deferred.pop(rid, None)
        self._finish(
            rid, "answer", body.get("text", ""),
            citations=list(body.get("citations", [])),
            confidence=body.get("confidence", 0.0),
        )
        self.session.history.append((rid, state["text"], body.get("text", "")))

    def _on_publish(self, env: Envelope):
        rid = env.request_id
        state = self._pending.get(rid)
        if state is None or state["done"]:
            return
        bundle = env.body.get("bundle", [])
        summary = "\n".join(f"{author}: {text}" for author, text in bundle)
        self._deferred.pop(rid, None)
        self._finish(rid, "publish", summary,
                     bundle=bundle, agora_id=env.body.get("agora_id", ""))
        self.session.history.append((rid, state["text"], summary))

    def _on_error(self, env: Envelope):
        rid = env.request_id
        state = self._pending.get(rid)
        if state is None or state["done"]:
            return
        code = env.body.get("code", "default")
        detail = env.body.get("detail", "")
        if code not in DEFERRABLE_CODES:
            self._finish(rid, "failure", humanize(code, detail), code=code)
            return
        now = self.ctx.bus.clock.tick
        entry = self._deferred.get(rid)
        if entry is None:
            entry = DeferredRequest(request_id=rid, text=state["text"], anchor=now)
            self._deferred[rid] = entry
            self.ctx.trace.append(now, rid, self.name, TraceAction.DEFERRED,
                                  f"{code} attempt=0")
            # one interim notice: the request is saved and will be retried
            self._emit("notice", rid, humanize(code, detail), code=code)
        elif entry.attempts >= self.ctx.options.max_attempts:
            self._deferred.pop(rid, None)
            self._finish(rid, "failure", humanize(RETRIES_EXHAUSTED),
                         code=RETRIES_EXHAUSTED)
            return
        due = entry.anchor + self.ctx.options.backoff_base * (2 ** entry.attempts)
        entry.next_due = due
        self.ctx.bus.at(due, lambda: self._retry(rid, due))

    def _retry(self, request_id: str, due: int):
        entry = self._deferred.get(request_id)
        if entry is None:  # answered while the timer was pending
            return
        entry.attempts += 1
        entry.anchor = due
        self.ctx.trace.append(self.ctx.bus.clock.tick, request_id, self.name,
                              TraceAction.RESUBMITTED, f"attempt={entry.attempts}")
        self._route(request_id, entry.text)

    # --- integration ------------------------------------------------------------

    def _on_integration_request(self, env: Envelope):
        rid = env.request_id
        segments = [str(s) for s in env.body.get("segments", [])]
        resolved: list[str] = []
        unmatched: list[str] = []
        for seg in segments:
            facts = self.session.matching_facts(text_mod.token_set(seg))
            if facts:
                resolved.append(facts[-1][1])
            else:
                unmatched.append(seg)
        if not unmatched:
            # everything was already known; never bother the user
            self.ctx.bus.post(self.name, env.sender, MessageKind.INTEGRATION_RESPONSE,
                              {"text": " ".join(resolved)}, rid)
            return
        self._prompts[rid] = {"segments": segments, "unmatched": unmatched,
                              "reply_to": env.sender}
        prompt = "I need a bit more to finish: " + "; ".join(unmatched)
        self._emit("prompt", rid, prompt, segments=unmatched)

    def provide_integration_reply(self, request_id: str, reply: str):
        """Forward the user's extra details to the waiting facilitator."""
        prompt = self._prompts.pop(request_id, None)
        if prompt is None:
            raise NoOutstandingIntegration(request_id)
        for seg in prompt["unmatched"]:
            key = text_mod.slug(seg) or "detail"
            self.memory_store(key, reply)
        self.ctx.bus.post(self.name, prompt["reply_to"],
                          MessageKind.INTEGRATION_RESPONSE,
                          {"text": reply}, request_id)

    def outstanding_prompts(self) -> list[str]:
        return sorted(self._prompts)

    # --- helpers -----------------------------------------------------------------

    def _finish(self, request_id: str, kind: str, text: str, **extra):
        state = self._pending.get(request_id)
        if state is not None:
            state["done"] = True
        self._emit(kind, request_id, text, **extra)

    def _emit(self, kind: str, request_id: str, text: str, **extra):
        event = {"kind": kind, "request_id": request_id, "text": text,
                 "tick": self.ctx.bus.clock.tick}
        event.update(extra)
        self.ctx.emit(event)
