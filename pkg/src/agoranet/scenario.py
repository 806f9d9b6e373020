"""Declarative scenarios: load, run deterministically, check expectations.

A scenario file bundles a topology, a knowledge base, user attributes and
turns, scripted reasoners (including offline windows and canned
integration replies), and machine-checkable expectations over the
resulting transcript and trace. Running the same scenario with the same
seed yields a byte-identical transcript and trace.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

import yaml

from agoranet.bus import TraceAction, TraceLog
from agoranet.context import RuntimeOptions
from agoranet.errors import AgoranetError, DanglingReference, MalformedScenario
from agoranet.kb import KnowledgeBase, make_item
from agoranet.mediator import AgentTemplate
from agoranet.reasoner import ReasonerScript
from agoranet.runtime import Network
from agoranet.topology import (
    TopologyConfig,
    ValidatedTopology,
    parse_topology,
    validate_topology,
)

EXPECTATION_KINDS = {
    "AgentsInvolved",
    "FinalAnswerContains",
    "StageSequence",
    "TraceCountAtMost",
    "ErrorSurfaced",
}

TERMINAL_KINDS = {"answer", "publish", "failure"}


@dataclass
class Scenario:
    name: str
    cfg: TopologyConfig
    topology: ValidatedTopology
    kb: KnowledgeBase
    attrs: dict[str, str] = field(default_factory=dict)
    facts: list[tuple[str, str]] = field(default_factory=list)
    turns: list[str] = field(default_factory=list)
    integration_replies: list[str] = field(default_factory=list)
    scripts: dict[str, ReasonerScript] = field(default_factory=dict)
    templates: list[AgentTemplate] = field(default_factory=list)
    expectations: list[dict] = field(default_factory=list)
    options: RuntimeOptions = field(default_factory=RuntimeOptions)


@dataclass
class RunResult:
    scenario: Scenario
    seed: int
    transcript: list[dict]
    trace: TraceLog
    network: Network

    def transcript_jsonl(self) -> str:
        return "\n".join(json.dumps(e, sort_keys=True) for e in self.transcript)

    def turn_request_ids(self) -> list[str]:
        return [e["request_id"] for e in self.transcript if e["kind"] == "user"]

    def terminal_event(self, request_id: str) -> dict | None:
        for event in reversed(self.transcript):
            if event["request_id"] == request_id and event["kind"] in TERMINAL_KINDS:
                return event
        return None


@dataclass
class ExpectationResult:
    kind: str
    ok: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'} {self.kind}: {self.detail}"


# --- loading ---------------------------------------------------------------


def load_scenario(source: str | Path) -> Scenario:
    """Load and cross-validate a scenario from YAML text or a file path."""
    base_dir = Path(".")
    if isinstance(source, Path) or (
        isinstance(source, str) and "\n" not in source and Path(source).exists()
    ):
        path = Path(source)
        base_dir = path.parent
        raw_text = path.read_text()
    else:
        raw_text = str(source)
    try:
        raw = yaml.safe_load(raw_text)
    except yaml.YAMLError as exc:
        raise MalformedScenario(str(exc)) from exc
    if not isinstance(raw, dict):
        raise MalformedScenario("scenario must be a mapping")

    name = str(raw.get("name") or "unnamed")

    if "topology_file" in raw:
        topo_text = (base_dir / str(raw["topology_file"])).read_text()
    elif "topology" in raw:
        topo = raw["topology"]
        topo_text = topo if isinstance(topo, str) else yaml.safe_dump(topo)
    else:
        raise MalformedScenario(f"{name}: no topology")
    try:
        cfg = parse_topology(topo_text)
        topology = validate_topology(cfg)
    except AgoranetError as exc:
        raise MalformedScenario(f"{name}: topology: {exc}") from exc

    domain_names = {d.name for d in cfg.domains}
    items = []
    for i, raw_item in enumerate(raw.get("kb") or []):
        if not isinstance(raw_item, dict):
            raise MalformedScenario(f"{name}: kb[{i}] must be a mapping")
        try:
            item = make_item(
                str(raw_item["id"]), str(raw_item["domain"]),
                str(raw_item["text"]), str(raw_item["condition"]),
            )
        except KeyError as exc:
            raise MalformedScenario(f"{name}: kb[{i}] missing {exc}") from exc
        except AgoranetError as exc:
            raise MalformedScenario(f"{name}: kb[{i}]: {exc}") from exc
        if item.domain not in domain_names:
            raise DanglingReference(f"{name}: kb[{i}] domain {item.domain!r}")
        items.append(item)
    kb = KnowledgeBase(items)

    user = raw.get("user") or {}
    attrs = {str(k): str(v) for k, v in (user.get("attrs") or {}).items()}
    facts = [
        (str(f["key"]), str(f["value"]))
        for f in (user.get("facts") or [])
    ]
    turns = [str(t) for t in (user.get("turns") or [])]
    if not turns:
        raise MalformedScenario(f"{name}: user.turns must be nonempty")
    replies = [str(r) for r in (user.get("integration_replies") or [])]

    templates = []
    for i, raw_tpl in enumerate(raw.get("templates") or []):
        try:
            templates.append(
                AgentTemplate(
                    name=str(raw_tpl["name"]),
                    description=str(raw_tpl["description"]),
                    example_questions=tuple(
                        str(q) for q in raw_tpl.get("example_questions") or []
                    ),
                    script=dict(raw_tpl.get("script") or {}),
                )
            )
        except KeyError as exc:
            raise MalformedScenario(f"{name}: templates[{i}] missing {exc}") from exc

    agent_names = {a.name for d in cfg.domains for a in d.agents}
    template_names = {t.name for t in templates}
    scripts: dict[str, ReasonerScript] = {}
    for key, raw_script in (raw.get("scripts") or {}).items():
        if key not in agent_names and key not in template_names:
            raise DanglingReference(f"{name}: scripts[{key}]")
        scripts[str(key)] = ReasonerScript.from_dict(raw_script or {})

    expectations = []
    for i, raw_exp in enumerate(raw.get("expectations") or []):
        kind = str((raw_exp or {}).get("kind", ""))
        if kind not in EXPECTATION_KINDS:
            raise MalformedScenario(f"{name}: expectations[{i}] kind {kind!r}")
        expectations.append(dict(raw_exp))

    options = RuntimeOptions()
    allowed = {f.name for f in fields(RuntimeOptions)}
    for key, value in (raw.get("options") or {}).items():
        if key not in allowed:
            raise MalformedScenario(f"{name}: options.{key}")
        setattr(options, key, type(getattr(options, key))(value))

    return Scenario(
        name=name, cfg=cfg, topology=topology, kb=kb, attrs=attrs,
        facts=facts, turns=turns, integration_replies=replies,
        scripts=scripts, templates=templates, expectations=expectations,
        options=options,
    )


def shipped_scenario_path(name: str) -> Path:
    """Resolve a shipped scenario by bare name."""
    from importlib import resources

    pkg_dir = resources.files("agoranet.scenarios")
    candidate = pkg_dir.joinpath(f"{name}.yaml")
    if not candidate.is_file():
        raise MalformedScenario(f"no shipped scenario named {name!r}")
    return Path(str(candidate))


# --- running ------------------------------------------------------------------


def run_scenario(scenario: Scenario, seed: int = 0) -> RunResult:
    """Deterministic replay: (scenario, seed) fixes transcript and trace."""
    network = Network(
        cfg=scenario.cfg,
        topology=scenario.topology,
        kb=scenario.kb,
        attrs=scenario.attrs,
        options=scenario.options,
        scripts=scenario.scripts,
        templates=scenario.templates,
        seed=seed,
    )
    for key, value in scenario.facts:
        network.twin.memory_store(key, value)

    replies = list(scenario.integration_replies)

    def auto_reply(event: dict):
        if event["kind"] == "prompt" and replies:
            network.answer_integration(event["request_id"], replies.pop(0))

    network.add_emit_hook(auto_reply)

    for turn in scenario.turns:
        network.post_user_message(turn)
        network.drain()

    return RunResult(
        scenario=scenario, seed=seed, transcript=network.transcript,
        trace=network.trace, network=network,
    )


# --- expectations -----------------------------------------------------------------


def assert_expectations(result: RunResult) -> list[ExpectationResult]:
    """Evaluate every expectation against the transcript and trace."""
    out = []
    for exp in result.scenario.expectations:
        out.append(_check(exp, result))
    return out


def _check(exp: dict, result: RunResult) -> ExpectationResult:
    kind = exp["kind"]
    rids = result.turn_request_ids()
    turn = int(exp.get("turn", 0))
    rid = rids[turn] if turn < len(rids) else ""

    if kind == "AgentsInvolved":
        expected = set(exp.get("agents", []))
        actual = result.trace.agents_involved(rid)
        return ExpectationResult(
            kind, actual == expected,
            f"expected {sorted(expected)}, got {sorted(actual)}",
        )
    if kind == "FinalAnswerContains":
        needle = str(exp.get("text", ""))
        event = result.terminal_event(rid)
        ok = event is not None and needle in event.get("text", "")
        return ExpectationResult(
            kind, ok, f"{needle!r} in terminal event of turn {turn}",
        )
    if kind == "StageSequence":
        expected = [int(s) for s in exp.get("stages", [])]
        actual = [
            int(r.detail)
            for r in result.trace.for_request(rid)
            if r.action == TraceAction.STAGE_ENTERED
        ]
        return ExpectationResult(
            kind, actual == expected, f"expected {expected}, got {actual}",
        )
    if kind == "TraceCountAtMost":
        cap = int(exp.get("count", 0))
        action = exp.get("action")
        if action:
            n = result.trace.count(TraceAction(action))
        else:
            n = len(result.trace.records)
        return ExpectationResult(kind, n <= cap, f"{n} <= {cap}")
    if kind == "ErrorSurfaced":
        code = str(exp.get("code", ""))
        ok = any(
            e.get("code") == code and e["kind"] in ("notice", "failure")
            for e in result.transcript
        )
        return ExpectationResult(kind, ok, f"code {code}")
    return ExpectationResult(kind, False, "unknown expectation kind")
