"""Domain agents: leaf workers bound to one domain's knowledge.

A domain agent answers sub-queries from its slice of the knowledge base
(under the requester's attributes — denials are traced, never silently
swallowed), joins the network by announcing a capability profile to its
parent, and can be scripted unavailable to exercise the retry path.
"""

from __future__ import annotations

import logging

from agoranet.bus import Envelope, MessageKind, TraceAction
from agoranet.context import RuntimeContext
from agoranet.errors import ACL_DENIED_ALL, NO_MATCHES
from agoranet.kb import KnowledgeItem, kb_query
from agoranet.mediator import handle_agora_request
from agoranet.profiles import (
    CapabilityProfile,
    build_capability_profile,
    profile_to_body,
)
from agoranet.reasoner import Reasoner
from agoranet.topology import AgentDecl
from agoranet.twin import humanize

logger = logging.getLogger(__name__)


class DomainAgent:
    def __init__(self, decl: AgentDecl, domain: str, ctx: RuntimeContext,
                 items: list[KnowledgeItem], reasoner: Reasoner,
                 offline_for: int = 0, offline: bool = False):
        self.name = decl.name
        self.decl = decl
        self.domain = domain
        self.ctx = ctx
        self.items = items
        self.reasoner = reasoner
        self.offline_remaining = offline_for
        self.offline_forever = offline
        self.profile: CapabilityProfile = build_capability_profile(
            decl, ctx.options.profile_k
        )

    # --- joining ----------------------------------------------------------

    def join(self):
        """Register, notify the parent, and announce capabilities upward."""
        self.ctx.bus.register(self.name, self.handle, parent=self.decl.parent)
        self.ctx.profiles.put(self.name, self.profile, recruitable=True)
        self.ctx.bus.post(
            self.name, self.decl.parent, MessageKind.CAPABILITY_ANNOUNCE,
            {"profile": profile_to_body(self.profile)},
            request_id=f"join-{self.name}",
        )

    # --- handling ------------------------------------------------------------

    def handle(self, env: Envelope):
        if env.kind == MessageKind.SUB_QUERY:
            self._on_subquery(env)
        elif env.kind in (MessageKind.RECRUIT, MessageKind.REVISION):
            handle_agora_request(self, env)
        else:
            logger.debug("%s ignoring %s", self.name, env.kind)

    def _offline_now(self) -> bool:
        if self.offline_forever:
            return True
        if self.offline_remaining > 0:
            self.offline_remaining -= 1
            return True
        return False

    def _on_subquery(self, env: Envelope):
        rid = env.request_id
        if self._offline_now():
            self.ctx.bus.post(
                self.name, env.sender, MessageKind.ERROR_NOTICE,
                {"code": "DomainUnavailable", "detail": self.domain,
                 "segment": env.body.get("segment", "")},
                rid,
            )
            return
        query = env.body.get("text", "")
        attrs = env.body.get("attrs", {})
        denied = 0

        def on_denied(item: KnowledgeItem):
            nonlocal denied
            denied += 1
            self.ctx.trace.append(self.ctx.bus.clock.tick, rid, self.name,
                                  TraceAction.ACL_DENIED, item.id)

        results = kb_query(self.items, query, attrs,
                           self.ctx.options.kb_limit, on_denied=on_denied)
        self.ctx.trace.append(self.ctx.bus.clock.tick, rid, self.name,
                              TraceAction.KB_READ,
                              f"{len(results)} accessible, {denied} denied")
        text, cited = self.reasoner.answer(query, results)
        if not results and not text:
            text = humanize(ACL_DENIED_ALL if denied else NO_MATCHES)
            cited = []
        confidence = results[0][1] if results else 0.0
        self.ctx.bus.post(
            self.name, env.sender, MessageKind.ANSWER,
            {"text": text, "citations": cited, "confidence": confidence,
             "segment": env.body.get("segment", "")},
            rid,
        )
