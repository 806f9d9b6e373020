"""Ephemeral mediators and the agora boards they moderate.

A mediator is spawned for exactly one task request and walks four stages:
prepare (create the agora, recruit or create the roster, ack the twin),
collect (gather every roster agent's initial solution onto the board),
discuss (fixed-snapshot revision rounds until a round changes nothing or
the cap is hit), publish (write the final bundle, hand it to the twin,
and unregister). The board outlives the mediator, read-only, for tracing.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import IntEnum

from agoranet.bus import Envelope, MessageKind, TraceAction
from agoranet.context import RuntimeContext
from agoranet.errors import BoardClosed, NoAgentsAvailable, NotAParticipant, RosterCollapsed
from agoranet.facilitator import score
from agoranet.profiles import build_capability_profile
from agoranet.reasoner import LexicalReasoner, Reasoner, ReasonerScript, ScriptedReasoner
from agoranet.topology import AgentDecl

logger = logging.getLogger(__name__)


class Stage(IntEnum):
    PREPARE = 1
    COLLECT = 2
    DISCUSS = 3
    PUBLISH = 4
    DONE = 5


@dataclass(frozen=True)
class AgoraEntry:
    author: str
    stage: int
    round: int
    content: str


class AgoraBoard:
    """Append-only staged blackboard, visible only to its participants."""

    def __init__(self, agora_id: str, request_id: str, mediator: str,
                 ctx: RuntimeContext):
        self.agora_id = agora_id
        self.request_id = request_id
        self.mediator = mediator
        self.ctx = ctx
        self.participants: set[str] = set()
        self.entries: list[AgoraEntry] = []
        self.published: list[tuple[str, str]] | None = None

    def _check_member(self, who: str):
        if who != self.mediator and who not in self.participants:
            self.ctx.trace.append(self.ctx.bus.clock.tick, self.request_id,
                                  who, TraceAction.ACL_DENIED,
                                  f"agora:{self.agora_id}")
            raise NotAParticipant(f"{who} is not on {self.agora_id}")

    def post(self, author: str, stage: int, round_no: int, content: str) -> int:
        if self.published is not None:
            raise BoardClosed(self.agora_id)
        self._check_member(author)
        self.entries.append(AgoraEntry(author=author, stage=stage,
                                       round=round_no, content=content))
        self.ctx.trace.append(self.ctx.bus.clock.tick, self.request_id, author,
                              TraceAction.AGORA_POST,
                              f"stage={stage} round={round_no}")
        return len(self.entries)

    def read(self, reader: str) -> list[AgoraEntry]:
        self._check_member(reader)
        return list(self.entries)

    def latest_by_author(self, author: str) -> AgoraEntry | None:
        for entry in reversed(self.entries):
            if entry.author == author:
                return entry
        return None

    def publish(self, bundle: list[tuple[str, str]]):
        if self.published is not None:
            raise BoardClosed(self.agora_id)
        self.published = list(bundle)
        self.ctx.trace.append(self.ctx.bus.clock.tick, self.request_id,
                              self.mediator, TraceAction.PUBLISHED, self.agora_id)

    def export(self) -> dict:
        """Full board for the trace viewer; bypasses the participant gate."""
        return {
            "agora_id": self.agora_id,
            "request_id": self.request_id,
            "participants": sorted(self.participants),
            "entries": [
                {"author": e.author, "stage": e.stage, "round": e.round,
                 "content": e.content}
                for e in self.entries
            ],
            "published": [list(p) for p in self.published] if self.published else None,
        }


@dataclass(frozen=True)
class AgentTemplate:
    name: str
    description: str
    example_questions: tuple[str, ...] = ()
    script: dict = field(default_factory=dict)


class TaskAgent:
    """Short-lived worker instantiated from a template for one agora."""

    def __init__(self, name: str, ctx: RuntimeContext, reasoner: Reasoner):
        self.name = name
        self.ctx = ctx
        self.reasoner = reasoner

    def handle(self, env: Envelope):
        handle_agora_request(self, env)


def handle_agora_request(agent, env: Envelope):
    """Recruit/revision handling shared by task agents and domain agents."""
    if env.kind == MessageKind.RECRUIT:
        proposal = agent.reasoner.propose(env.body.get("task", ""), [])
        if proposal is None:
            return  # silent agents get dropped by the collect timeout
        agent.ctx.bus.post(agent.name, env.sender, MessageKind.INITIAL_SOLUTION,
                           {"agora_id": env.body.get("agora_id", ""),
                            "text": proposal}, env.request_id)
    elif env.kind == MessageKind.REVISION:
        revised = agent.reasoner.revise(env.body.get("own", ""),
                                        env.body.get("peers", []),
                                        int(env.body.get("round", 0)))
        if revised is None:
            agent.ctx.bus.post(agent.name, env.sender, MessageKind.ACK,
                               {"agora_id": env.body.get("agora_id", ""),
                                "round": env.body.get("round", 0),
                                "decline": True}, env.request_id)
        else:
            agent.ctx.bus.post(agent.name, env.sender, MessageKind.REVISION,
                               {"agora_id": env.body.get("agora_id", ""),
                                "round": env.body.get("round", 0),
                                "text": revised}, env.request_id)


@dataclass
class MediatorState:
    request_id: str
    stage: Stage
    agora_id: str
    roster: list[str]
    round: int = 0


class Mediator:
    """One instance per task request; unregisters after publishing."""

    def __init__(self, name: str, ctx: RuntimeContext,
                 templates: list[AgentTemplate],
                 scripts: dict[str, ReasonerScript] | None = None):
        self.name = name
        self.ctx = ctx
        self.templates = templates
        self.scripts = scripts or {}
        self.state: MediatorState | None = None
        self.board: AgoraBoard | None = None
        self.origin_twin = ""
        self._created: list[str] = []
        self._awaiting: set[str] = set()
        self._timers: dict[str, int] = {}
        self._round_revised = False

    # --- dispatch ----------------------------------------------------------

    def handle(self, env: Envelope):
        if env.kind == MessageKind.TASK_REQUEST:
            self.stage1_prepare(env)
        elif env.kind == MessageKind.INITIAL_SOLUTION:
            self._on_initial_solution(env)
        elif env.kind in (MessageKind.REVISION, MessageKind.ACK):
            self._on_revision_reply(env)
        else:
            logger.debug("%s ignoring %s", self.name, env.kind)

    def _enter_stage(self, stage: Stage):
        self.state.stage = stage
        self.ctx.trace.append(self.ctx.bus.clock.tick, self.state.request_id,
                              self.name, TraceAction.STAGE_ENTERED, str(int(stage)))

    # --- stage 1: prepare -----------------------------------------------------

    def stage1_prepare(self, env: Envelope):
        rid = env.request_id
        task = env.body.get("text", "")
        self.origin_twin = env.body.get("origin_twin", env.sender)
        agora_id = self.ctx.new_agora_id()
        self.state = MediatorState(request_id=rid, stage=Stage.PREPARE,
                                   agora_id=agora_id, roster=[])
        self._enter_stage(Stage.PREPARE)
        self.board = AgoraBoard(agora_id, rid, self.name, self.ctx)
        self.ctx.boards[agora_id] = self.board

        threshold = self.ctx.options.recruit_threshold
        roster = [name for name, prof in self.ctx.profiles.recruitable()
                  if score(task, prof) >= threshold]
        if not roster:
            roster = self._create_from_templates()
        if not roster:
            self.ctx.bus.post(self.name, self.origin_twin, MessageKind.ERROR_NOTICE,
                              {"code": NoAgentsAvailable.code, "detail": task}, rid)
            self._finish()
            return
        self.state.roster = roster
        self.board.participants = set(roster)
        self.ctx.bus.post(self.name, self.origin_twin, MessageKind.ACK,
                          {"agora_id": agora_id, "roster": roster}, rid)
        self._stage2_collect(task)

    def _create_from_templates(self) -> list[str]:
        created = []
        count = min(self.ctx.options.created_agents, len(self.templates))
        for template in self.templates[:count]:
            name = self.ctx.new_instance_name(template.name)
            script_raw = self.scripts.get(template.name)
            if script_raw is not None:
                reasoner: Reasoner = ScriptedReasoner(name, script_raw)
            elif template.script:
                reasoner = ScriptedReasoner(name, ReasonerScript.from_dict(template.script))
            else:
                reasoner = LexicalReasoner(name)
            agent = TaskAgent(name, self.ctx, reasoner)
            self.ctx.bus.register(name, agent.handle)
            decl = AgentDecl(name=name, parent="", description=template.description,
                             example_questions=template.example_questions)
            profile = build_capability_profile(decl, self.ctx.options.profile_k)
            self.ctx.profiles.put(name, profile, recruitable=True)
            self._created.append(name)
            created.append(name)
        return created

    # --- stage 2: collect ---------------------------------------------------

    def _stage2_collect(self, task: str):
        self._enter_stage(Stage.COLLECT)
        rid = self.state.request_id
        self._awaiting = set(self.state.roster)
        due = self.ctx.bus.clock.tick + self.ctx.options.collect_timeout
        for agent in self.state.roster:
            self.ctx.bus.post(self.name, agent, MessageKind.RECRUIT,
                              {"task": task, "agora_id": self.state.agora_id}, rid)
            self._timers[agent] = self.ctx.bus.at(
                due, lambda a=agent: self._collect_timeout(a))

    def _on_initial_solution(self, env: Envelope):
        if self.state is None or self.state.stage != Stage.COLLECT:
            return
        agent = env.sender
        if agent not in self._awaiting:
            return
        self._awaiting.discard(agent)
        self._cancel_timer(agent)
        self.board.post(agent, int(Stage.COLLECT), 0, env.body.get("text", ""))
        if not self._awaiting:
            self._stage3_discuss()

    def _collect_timeout(self, agent: str):
        if self.state is None or self.state.stage != Stage.COLLECT:
            return
        if agent not in self._awaiting:
            return
        self._awaiting.discard(agent)
        self.state.roster.remove(agent)
        self.board.participants.discard(agent)
        if self._awaiting:
            return
        if self.state.roster:
            self._stage3_discuss()
        else:
            self.ctx.bus.post(self.name, self.origin_twin, MessageKind.ERROR_NOTICE,
                              {"code": RosterCollapsed.code,
                               "detail": self.state.agora_id},
                              self.state.request_id)
            self._finish()

    # --- stage 3: discuss ------------------------------------------------------

    def _stage3_discuss(self):
        self._enter_stage(Stage.DISCUSS)
        self.state.round = 1
        self._begin_round()

    def _begin_round(self):
        rid = self.state.request_id
        round_no = self.state.round
        self._round_revised = False
        self._awaiting = set(self.state.roster)
        # every agent sees the same pre-round snapshot
        latest = {a: self.board.latest_by_author(a) for a in self.state.roster}
        due = self.ctx.bus.clock.tick + self.ctx.options.collect_timeout
        for agent in self.state.roster:
            peers = [
                {"author": other, "content": latest[other].content}
                for other in self.state.roster
                if other != agent and latest[other] is not None
            ]
            own = latest[agent].content if latest[agent] else ""
            self.ctx.bus.post(self.name, agent, MessageKind.REVISION,
                              {"agora_id": self.state.agora_id, "round": round_no,
                               "own": own, "peers": peers}, rid)
            self._timers[agent] = self.ctx.bus.at(
                due, lambda a=agent: self._revision_timeout(a))

    def _on_revision_reply(self, env: Envelope):
        if self.state is None or self.state.stage != Stage.DISCUSS:
            return
        agent = env.sender
        if agent not in self._awaiting:
            return
        self._awaiting.discard(agent)
        self._cancel_timer(agent)
        if env.kind == MessageKind.REVISION:
            self.board.post(agent, int(Stage.DISCUSS), self.state.round,
                            env.body.get("text", ""))
            self._round_revised = True
        if not self._awaiting:
            self._end_round()

    def _revision_timeout(self, agent: str):
        if self.state is None or self.state.stage != Stage.DISCUSS:
            return
        if agent not in self._awaiting:
            return
        self._awaiting.discard(agent)  # a silent agent keeps its last entry
        if not self._awaiting:
            self._end_round()

    def _end_round(self):
        if not self._round_revised or self.state.round >= self.ctx.options.max_rounds:
            self.stage4_publish()
            return
        self.state.round += 1
        self._begin_round()

    # --- stage 4: publish ------------------------------------------------------

    def stage4_publish(self):
        self._enter_stage(Stage.PUBLISH)
        bundle = []
        for agent in sorted(self.state.roster):
            entry = self.board.latest_by_author(agent)
            bundle.append((agent, entry.content if entry else ""))
        self.board.publish(bundle)
        self.ctx.bus.post(self.name, self.origin_twin, MessageKind.PUBLISH,
                          {"agora_id": self.state.agora_id,
                           "bundle": [list(b) for b in bundle]},
                          self.state.request_id)
        self._finish()

    # --- teardown ---------------------------------------------------------------

    def _cancel_timer(self, agent: str):
        timer = self._timers.pop(agent, None)
        if timer is not None:
            self.ctx.bus.cancel_timer(timer)

    def _finish(self):
        for agent in list(self._timers):
            self._cancel_timer(agent)
        for name in self._created:
            self.ctx.bus.unregister(name)
            self.ctx.profiles.remove(name)
        self.state.stage = Stage.DONE
        self.ctx.bus.unregister(self.name)
