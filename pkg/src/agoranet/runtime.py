"""Assemble a validated topology into a live network on one bus.

One ``Network`` per user session: a twin, the declared facilitators,
facilitator-capable agents for every node with children, and domain
agents bound to their slice of the knowledge base. ``drain`` drives the
bus to quiescence, chasing timers across idle ticks, and can pause while
a user prompt is outstanding so service callers get a chance to answer.
"""

from __future__ import annotations

import logging
from typing import Callable, Optional

from agoranet.bus import MessageBus, TraceLog
from agoranet.context import ProfileRegistry, RuntimeContext, RuntimeOptions
from agoranet.domain_agent import DomainAgent
from agoranet.errors import BudgetExhausted
from agoranet.facilitator import Facilitator
from agoranet.kb import KnowledgeBase
from agoranet.mediator import AgentTemplate, Mediator
from agoranet.reasoner import LexicalReasoner, ReasonerScript, ScriptedReasoner
from agoranet.topology import (
    ROLE_DOMAIN_AGENT,
    ROLE_FACILITATOR,
    TWIN_NAME,
    TopologyConfig,
    ValidatedTopology,
)
from agoranet.twin import DigitalTwin, SessionMemory

logger = logging.getLogger(__name__)


class Network:
    def __init__(
        self,
        cfg: TopologyConfig,
        topology: ValidatedTopology,
        kb: KnowledgeBase,
        attrs: dict[str, str],
        session_id: str = "local",
        options: RuntimeOptions | None = None,
        scripts: dict[str, ReasonerScript] | None = None,
        templates: list[AgentTemplate] | None = None,
        emit: Optional[Callable[[dict], None]] = None,
        seed: int = 0,
    ):
        self.cfg = cfg
        self.topology = topology
        self.kb = kb
        self.options = options or RuntimeOptions()
        self.scripts = scripts or {}
        self.templates = list(templates or [])
        self.seed = seed  # reserved for stochastic reasoners; unused today
        self.transcript: list[dict] = []
        self._emit_hooks: list[Callable[[dict], None]] = []
        if emit:
            self._emit_hooks.append(emit)

        self.trace = TraceLog()
        self.bus = MessageBus(self.trace)
        self.ctx = RuntimeContext(
            bus=self.bus,
            trace=self.trace,
            options=self.options,
            profiles=ProfileRegistry(),
            emit=self._emit,
            spawn_mediator=self._spawn_mediator,
        )
        self._mediator_seq = 0
        self._mediators: list[str] = []

        roots = topology.root_facilitators
        self.twin = DigitalTwin(
            TWIN_NAME, self.ctx, SessionMemory(session_id), attrs,
            facilitator=roots[0] if roots else None,
        )
        self.bus.register(TWIN_NAME, self.twin.handle)

        self.facilitators: dict[str, Facilitator] = {}
        self.domain_agents: dict[str, DomainAgent] = {}

        for name in roots:
            fac = Facilitator(name, self.ctx, parent=None)
            fac.join()
            self.facilitators[name] = fac

        # document order keeps registration (and thus the trace) stable
        for domain in cfg.domains:
            for decl in domain.agents:
                node = topology.nodes[decl.name]
                if node.children:
                    fac = Facilitator(decl.name, self.ctx, parent=decl.parent)
                    fac.join()
                    self.facilitators[decl.name] = fac
                else:
                    script = self.scripts.get(decl.name)
                    reasoner = (
                        ScriptedReasoner(decl.name, script)
                        if script is not None
                        else LexicalReasoner(decl.name)
                    )
                    agent = DomainAgent(
                        decl,
                        domain=node.domain or domain.name,
                        ctx=self.ctx,
                        items=kb.for_domain(node.domain or domain.name),
                        reasoner=reasoner,
                        offline_for=script.offline_for if script else 0,
                        offline=script.offline if script else False,
                    )
                    agent.join()
                    self.domain_agents[decl.name] = agent
        # flush join notifications and capability announcements
        self.drain()

    # --- events ------------------------------------------------------------

    def _emit(self, event: dict):
        self.transcript.append(event)
        for hook in self._emit_hooks:
            hook(event)

    def add_emit_hook(self, hook: Callable[[dict], None]):
        self._emit_hooks.append(hook)

    # --- mediation -----------------------------------------------------------

    def _spawn_mediator(self) -> str:
        self._mediator_seq += 1
        name = f"mediator-{self._mediator_seq}"
        mediator = Mediator(name, self.ctx, self.templates, self.scripts)
        self.bus.register(name, mediator.handle)
        self._mediators.append(name)
        return name

    # --- driving ---------------------------------------------------------------

    def drain(self, max_steps: int | None = None, pause_on_prompt: bool = False) -> int:
        """Run to quiescence: empty queue and no live timers.

        With ``pause_on_prompt`` the loop stops early (queue already empty)
        while an integration prompt awaits a human, instead of idling the
        clock into the timeout.
        """
        budget = max_steps if max_steps is not None else self.options.step_budget
        steps = 0
        while True:
            while self.bus.queue_len:
                if steps >= budget:
                    raise BudgetExhausted(budget)
                self.bus.step()
                steps += 1
            if pause_on_prompt and self.twin.outstanding_prompts():
                return steps
            if self.bus.timers_pending:
                if steps >= budget:
                    raise BudgetExhausted(budget)
                self.bus.idle_tick()
                steps += 1
            else:
                return steps

    # --- user API (used by harness, gateway, repl) ------------------------------

    def post_user_message(self, message: str) -> str | None:
        return self.twin.receive_user_text(message)

    def answer_integration(self, request_id: str, reply: str):
        self.twin.provide_integration_reply(request_id, reply)

    def agents_involved(self, request_id: str) -> set[str]:
        return self.trace.agents_involved(request_id)

    def board_export(self, agora_id: str) -> dict | None:
        board = self.ctx.boards.get(agora_id)
        return board.export() if board else None
