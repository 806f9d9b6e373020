"""HTTP gateway: sessions, messages, integrations, traces, boards, events.

One network per session, fully isolated; a session id is the only
capability needed and is unguessable (128 random bits). All user-visible
activity is published on the session's event stream as JSON frames
``{type, request_id, payload}`` — answers, integration prompts, humanized
errors, retry notices, and publish bundles — so request/response callers
and the operator console see the same timeline.
"""

from __future__ import annotations

import asyncio
import json
import logging
import re
import secrets
import threading
from dataclasses import dataclass, field

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, StreamingResponse

from agoranet import _kernels
from agoranet.bus import TraceAction
from agoranet.context import RuntimeOptions
from agoranet.errors import (
    AgoranetError,
    BadAttributes,
    BudgetExhausted,
    EmptyMessage,
    NoOutstandingIntegration,
    NotYourBoard,
    UnknownRequest,
    UnknownSession,
)
from agoranet.kb import KnowledgeBase
from agoranet.mediator import AgentTemplate
from agoranet.runtime import Network
from agoranet.topology import TopologyConfig, ValidatedTopology, validate_topology

logger = logging.getLogger(__name__)

_ATTR_NAME = re.compile(r"^[a-z_][a-z0-9_]*$")

DEFAULT_TEMPLATES = [
    AgentTemplate(
        name="writer",
        description="Writer drafts clear first versions of notes, outlines, and announcements.",
    ),
    AgentTemplate(
        name="organizer",
        description="Organizer turns drafts into ordered checklists with owners and timing.",
    ),
]


@dataclass
class GatewaySession:
    session_id: str
    network: Network
    events: list[dict] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)
    web_request_id: str = ""

    def push(self, event: dict):
        self.events.append(
            {
                "type": event["kind"],
                "request_id": event["request_id"],
                "payload": {k: v for k, v in event.items()
                            if k not in ("kind", "request_id")},
            }
        )


def _check_attrs(attrs) -> dict[str, str]:
    if not isinstance(attrs, dict):
        raise BadAttributes("attributes must be an object")
    clean = {}
    for key, value in attrs.items():
        if not isinstance(key, str) or not _ATTR_NAME.match(key):
            raise BadAttributes(f"bad attribute name {key!r}")
        if not isinstance(value, str):
            raise BadAttributes(f"attribute {key!r} must be a string")
        clean[key] = value
    return clean


_STATUS = {
    "BadAttributes": 400,
    "EmptyMessage": 400,
    "UnknownSession": 404,
    "UnknownRequest": 404,
    "NotYourBoard": 404,
    "NoOutstandingIntegration": 409,
    "BudgetExhausted": 503,
}


def create_app(
    cfg: TopologyConfig,
    kb: KnowledgeBase | None = None,
    templates: list[AgentTemplate] | None = None,
    options: RuntimeOptions | None = None,
    topology: ValidatedTopology | None = None,
) -> FastAPI:
    app = FastAPI(title="agoranet gateway")
    topo = topology or validate_topology(cfg)
    base_kb = kb or KnowledgeBase()
    base_templates = templates if templates is not None else DEFAULT_TEMPLATES
    base_options = options or RuntimeOptions()
    sessions: dict[str, GatewaySession] = {}

    @app.exception_handler(AgoranetError)
    async def agoranet_error(request: Request, exc: AgoranetError):
        return JSONResponse(
            status_code=_STATUS.get(exc.code, 500),
            content={"code": exc.code, "detail": exc.detail},
        )

    def get_session(session_id: str) -> GatewaySession:
        session = sessions.get(session_id)
        if session is None:
            raise UnknownSession(session_id)
        return session

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "kernel": _kernels.BACKEND}

    @app.post("/sessions")
    def create_session(body: dict):
        attrs = _check_attrs(body.get("attrs", {}))
        session_id = secrets.token_hex(16)
        network = Network(
            cfg=cfg, topology=topo, kb=base_kb, attrs=attrs,
            session_id=session_id, options=base_options,
            templates=base_templates,
        )
        session = GatewaySession(session_id=session_id, network=network,
                                 web_request_id=f"web-{session_id[:8]}")
        network.add_emit_hook(session.push)
        sessions[session_id] = session
        return {"session_id": session_id}

    def _drive(session: GatewaySession):
        try:
            session.network.drain(pause_on_prompt=True)
        except BudgetExhausted as exc:
            session.push({"kind": "failure", "request_id": "",
                          "text": "", "code": exc.code})

    @app.post("/sessions/{session_id}/messages")
    def post_message(session_id: str, body: dict):
        session = get_session(session_id)
        text = str(body.get("text", ""))
        if not text.strip():
            raise EmptyMessage()
        with session.lock:
            request_id = session.network.post_user_message(text)
            # web-originated operations share the trace schema under a
            # session-scoped id so per-request agent sets stay clean
            session.network.trace.append(
                session.network.bus.clock.tick, session.web_request_id, "web",
                TraceAction.RECEIVED, f"message {request_id}",
            )
            _drive(session)
        return {"request_id": request_id}

    @app.post("/sessions/{session_id}/integrations")
    def post_integration(session_id: str, body: dict):
        session = get_session(session_id)
        request_id = str(body.get("request_id", ""))
        text = str(body.get("text", ""))
        with session.lock:
            session.network.answer_integration(request_id, text)
            session.network.trace.append(
                session.network.bus.clock.tick, session.web_request_id, "web",
                TraceAction.RECEIVED, f"integration {request_id}",
            )
            _drive(session)
        return {"accepted": True}

    @app.get("/sessions/{session_id}/trace")
    def get_trace(session_id: str, request: str):
        session = get_session(session_id)
        records = session.network.trace.for_request(request)
        if not records:
            raise UnknownRequest(request)
        return {
            "request_id": request,
            "records": [json.loads(r.to_json()) for r in records],
            "agents_involved": sorted(session.network.agents_involved(request)),
        }

    @app.get("/sessions/{session_id}/agora/{agora_id}")
    def get_agora(session_id: str, agora_id: str):
        session = get_session(session_id)
        board = session.network.board_export(agora_id)
        if board is None:
            raise NotYourBoard(agora_id)
        return board

    @app.get("/sessions/{session_id}/events")
    async def get_events(session_id: str, once: bool = False, after: int = 0):
        session = get_session(session_id)

        async def stream():
            cursor = max(0, after)
            while True:
                events = session.events[cursor:]
                for event in events:
                    yield f"data: {json.dumps(event)}\n\n"
                cursor += len(events)
                if once:
                    return
                await asyncio.sleep(0.05)

        return StreamingResponse(stream(), media_type="text/event-stream")

    return app
