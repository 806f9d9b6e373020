"""Deterministic message bus, logical clock, and append-only trace store.

Simulation mode is single-threaded: one dispatcher delivers exactly one
envelope per step and the logical clock advances by one per delivery.
Queue order is the total order (sent_at, send_seq), so two runs of the
same scenario produce byte-identical traces.

Timers extend the spec'd delivery loop: deferred retries and protocol
timeouts are wakeups keyed by a due tick. When the envelope queue is
empty but timers are still live, the owner of the bus may advance the
clock with idle ticks until the next timer fires; quiescence means no
queued envelopes and no live timers.
"""

from __future__ import annotations

import heapq
import json
import logging
import threading
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Callable, Optional

from agoranet.errors import (
    BudgetExhausted,
    DuplicateName,
    UNKNOWN_RECIPIENT,
    UnknownSender,
)

logger = logging.getLogger(__name__)


class MessageKind(str, Enum):
    USER_QUERY = "UserQuery"
    SUB_QUERY = "SubQuery"
    ANSWER = "Answer"
    INTEGRATION_REQUEST = "IntegrationRequest"
    INTEGRATION_RESPONSE = "IntegrationResponse"
    TASK_REQUEST = "TaskRequest"
    RECRUIT = "Recruit"
    INITIAL_SOLUTION = "InitialSolution"
    REVISION = "Revision"
    FINAL_SOLUTION = "FinalSolution"
    PUBLISH = "Publish"
    ERROR_NOTICE = "ErrorNotice"
    JOIN_NOTIFY = "JoinNotify"
    CAPABILITY_ANNOUNCE = "CapabilityAnnounce"
    ACK = "Ack"


class TraceAction(str, Enum):
    SENT = "Sent"
    RECEIVED = "Received"
    KB_READ = "KbRead"
    ACL_DENIED = "AclDenied"
    STAGE_ENTERED = "StageEntered"
    AGORA_POST = "AgoraPost"
    DEFERRED = "Deferred"
    RESUBMITTED = "Resubmitted"
    PUBLISHED = "Published"


@dataclass
class Envelope:
    message_id: str
    request_id: str
    sender: str
    recipient: str
    kind: MessageKind
    body: dict
    sent_at: int = 0


@dataclass(frozen=True)
class TraceRecord:
    seq: int
    tick: int
    request_id: str
    actor: str
    action: TraceAction
    detail: str

    def to_json(self) -> str:
        d = asdict(self)
        d["action"] = self.action.value
        return json.dumps(d, separators=(",", ":"))


@dataclass
class LogicalClock:
    tick: int = 0

    def advance(self) -> int:
        self.tick += 1
        return self.tick


class TraceLog:
    """Append-only session data service; one linearized writer."""

    def __init__(self):
        self._records: list[TraceRecord] = []
        self._lock = threading.Lock()

    def append(self, tick: int, request_id: str, actor: str,
               action: TraceAction, detail: str = "") -> int:
        with self._lock:
            seq = len(self._records) + 1
            self._records.append(
                TraceRecord(seq=seq, tick=tick, request_id=request_id,
                            actor=actor, action=action, detail=detail)
            )
            return seq

    @property
    def records(self) -> list[TraceRecord]:
        return list(self._records)

    def for_request(self, request_id: str) -> list[TraceRecord]:
        return [r for r in self._records if r.request_id == request_id]

    def agents_involved(self, request_id: str) -> set[str]:
        """Distinct actors that touched a request; empty for unknown ids."""
        return {r.actor for r in self._records if r.request_id == request_id}

    def count(self, action: TraceAction, request_id: str | None = None) -> int:
        return sum(
            1
            for r in self._records
            if r.action == action
            and (request_id is None or r.request_id == request_id)
        )

    def to_jsonl(self) -> str:
        return "\n".join(r.to_json() for r in self._records)

    @staticmethod
    def parse_jsonl(text: str) -> list[TraceRecord]:
        records = []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            d = json.loads(line)
            records.append(
                TraceRecord(
                    seq=d["seq"], tick=d["tick"], request_id=d["request_id"],
                    actor=d["actor"], action=TraceAction(d["action"]),
                    detail=d.get("detail", ""),
                )
            )
        return records


@dataclass
class Registration:
    name: str
    _bus: "MessageBus" = field(repr=False)

    def unregister(self):
        self._bus.unregister(self.name)


class MessageBus:
    def __init__(self, trace: TraceLog | None = None):
        self.trace = trace if trace is not None else TraceLog()
        self.clock = LogicalClock()
        self._handlers: dict[str, Callable[[Envelope], None]] = {}
        self._queue: list[tuple[int, int, Envelope]] = []
        self._timers: list[tuple[int, int, Callable[[], None]]] = []
        self._cancelled: set[int] = set()
        self._send_seq = 0
        self._timer_seq = 0
        self._message_seq = 0
        self.dropped = 0

    # --- registration -------------------------------------------------

    def register(self, name: str, handler: Callable[[Envelope], None],
                 parent: str | None = None) -> Registration:
        if name in self._handlers:
            raise DuplicateName(name)
        self._handlers[name] = handler
        if parent:
            self.post(name, parent, MessageKind.JOIN_NOTIFY,
                      {"agent": name}, request_id=f"join-{name}")
        return Registration(name=name, _bus=self)

    def unregister(self, name: str):
        self._handlers.pop(name, None)

    def is_registered(self, name: str) -> bool:
        return name in self._handlers

    # --- sending --------------------------------------------------------

    def post(self, sender: str, recipient: str, kind: MessageKind,
             body: dict, request_id: str) -> Envelope:
        """Build and send an envelope in one call."""
        self._message_seq += 1
        env = Envelope(
            message_id=f"m{self._message_seq:06d}",
            request_id=request_id,
            sender=sender,
            recipient=recipient,
            kind=kind,
            body=body,
            sent_at=self.clock.tick,
        )
        self.send(env)
        return env

    def send(self, env: Envelope):
        if env.sender not in self._handlers:
            raise UnknownSender(env.sender)
        self._enqueue(env)

    def _enqueue(self, env: Envelope):
        env.sent_at = self.clock.tick
        self._send_seq += 1
        heapq.heappush(self._queue, (env.sent_at, self._send_seq, env))
        self.trace.append(
            env.sent_at, env.request_id, env.sender, TraceAction.SENT,
            f"{env.kind.value}->{env.recipient}",
        )

    # --- timers -----------------------------------------------------------

    def at(self, due_tick: int, callback: Callable[[], None]) -> int:
        """Schedule ``callback`` for the first tick >= ``due_tick``."""
        self._timer_seq += 1
        heapq.heappush(self._timers, (due_tick, self._timer_seq, callback))
        return self._timer_seq

    def cancel_timer(self, timer_id: int):
        self._cancelled.add(timer_id)

    @property
    def timers_pending(self) -> int:
        return sum(1 for _, tid, _ in self._timers if tid not in self._cancelled)

    def _fire_due_timers(self):
        while self._timers and self._timers[0][0] <= self.clock.tick:
            _, tid, callback = heapq.heappop(self._timers)
            if tid in self._cancelled:
                self._cancelled.discard(tid)
                continue
            callback()

    # --- stepping ------------------------------------------------------------

    @property
    def queue_len(self) -> int:
        return len(self._queue)

    def step(self) -> Optional[Envelope]:
        """Deliver the lowest-keyed queued envelope; None when queue empty."""
        if not self._queue:
            return None
        self.clock.advance()
        self._fire_due_timers()
        _, _, env = heapq.heappop(self._queue)
        handler = self._handlers.get(env.recipient)
        if handler is None:
            self._drop(env)
            return env
        self.trace.append(
            self.clock.tick, env.request_id, env.recipient,
            TraceAction.RECEIVED, f"{env.kind.value}<-{env.sender}",
        )
        handler(env)
        return env

    def idle_tick(self):
        """Advance the clock with no delivery, to reach pending timers."""
        self.clock.advance()
        self._fire_due_timers()

    def _drop(self, env: Envelope):
        self.dropped += 1
        logger.debug("dropped %s: recipient %s not registered", env.message_id, env.recipient)
        if env.kind == MessageKind.ERROR_NOTICE:
            return  # never bounce a bounce
        if env.sender in self._handlers:
            # the bounce speaks for the unreachable recipient, so it skips
            # the registered-sender check
            self._message_seq += 1
            bounce = Envelope(
                message_id=f"m{self._message_seq:06d}",
                request_id=env.request_id,
                sender=env.recipient,
                recipient=env.sender,
                kind=MessageKind.ERROR_NOTICE,
                body={"code": UNKNOWN_RECIPIENT, "detail": env.recipient,
                      "original_kind": env.kind.value},
            )
            self._enqueue(bounce)

    def run_until_quiescent(self, max_steps: int = 10_000) -> int:
        """Step until the envelope queue drains; timers are not chased."""
        steps = 0
        while self._queue:
            if steps >= max_steps:
                raise BudgetExhausted(max_steps)
            self.step()
            steps += 1
        return steps
