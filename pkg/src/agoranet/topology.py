"""Declarative topology document: parsing, validation, rendering.

The document is YAML. Field names follow the deployment-values layout the
runtime inherited (``webapp.active``, ``webapp.vesion``, ``twin.version``,
``twin.podTemplates.replicaCount``, ``facilitators[].name``,
``domains[].agents[].{name,parent,info.agentDescription,info.exampleQuestions}``).
Note the historical misspelling ``vesion``: documents in the wild carry it,
so both ``vesion`` and ``version`` are accepted on read and ``vesion`` is
written back.

``replicaCount`` values are validated but a single logical agent is
instantiated per declaration; replica scheduling belongs to the deployment
layer, not this runtime.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import yaml

from agoranet.errors import (
    BadValue,
    CycleDetected,
    DuplicateName,
    MalformedDocument,
    MissingField,
    UnknownParent,
)

# Reserved name of the per-session user agent; it is always part of the
# validated node map and may not be redeclared.
TWIN_NAME = "twin"

ROLE_TWIN = "twin"
ROLE_FACILITATOR = "facilitator"
ROLE_DOMAIN_AGENT = "domain-agent"


@dataclass(frozen=True)
class AgentDecl:
    name: str
    parent: str
    description: str
    example_questions: tuple[str, ...] = ()


@dataclass(frozen=True)
class FacilitatorDecl:
    name: str
    replicas: int = 1


@dataclass(frozen=True)
class DomainDecl:
    name: str
    agents: tuple[AgentDecl, ...] = ()


@dataclass
class TopologyConfig:
    webapp_active: bool = False
    webapp_version: str = ""
    twin_version: str = ""
    twin_replicas: int = 1
    facilitators: tuple[FacilitatorDecl, ...] = ()
    domains: tuple[DomainDecl, ...] = ()
    warnings: list[str] = field(default_factory=list, compare=False)


@dataclass
class Node:
    name: str
    role: str
    parent: str | None = None
    children: list[str] = field(default_factory=list)
    domain: str | None = None

    @property
    def facilitator_capable(self) -> bool:
        """A node with children takes on the facilitator role."""
        return self.role == ROLE_FACILITATOR or bool(self.children)


@dataclass
class ValidatedTopology:
    nodes: dict[str, Node]
    root_facilitators: list[str]

    def agents(self) -> list[Node]:
        return [n for n in self.nodes.values() if n.role == ROLE_DOMAIN_AGENT]

    def decl_index(self, cfg: TopologyConfig) -> dict[str, AgentDecl]:
        return {a.name: a for d in cfg.domains for a in d.agents}


# --- parsing -----------------------------------------------------------------

_KNOWN_TOP = {"webapp", "twin", "facilitators", "domains"}
_KNOWN_WEBAPP = {"active", "vesion", "version"}
_KNOWN_TWIN = {"version", "podTemplates"}
_KNOWN_FAC = {"name", "podTemplates"}
_KNOWN_DOMAIN = {"name", "agents"}
_KNOWN_AGENT = {"name", "parent", "info"}
_KNOWN_INFO = {"agentDescription", "exampleQuestions"}


def _require(mapping: dict, key: str, where: str):
    if key not in mapping or mapping[key] is None:
        raise MissingField(f"{where}.{key}")
    return mapping[key]


def _as_str(value, where: str) -> str:
    if not isinstance(value, str):
        raise BadValue(f"{where} must be a string, got {type(value).__name__}")
    return value

def _as_name(value, where: str) -> str:
    name = _as_str(value, where)
    if not name.strip():
        raise BadValue(f"{where} must be nonempty")
    return name


def _as_replicas(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise BadValue(f"{where} must be an integer")
    if value < 1:
        raise BadValue(f"{where} must be >= 1, got {value}")
    return value


def _collect_unknown(mapping: dict, known: set, where: str, warnings: list[str]):
    for key in mapping:
        if key not in known:
            warnings.append(f"unknown key {where}.{key}")


def split_question_block(value) -> tuple[str, ...]:
    """Example questions arrive as a '- item' block scalar or a YAML list."""
    if value is None:
        return ()
    if isinstance(value, list):
        return tuple(str(v).strip() for v in value if str(v).strip())
    if not isinstance(value, str):
        raise BadValue("exampleQuestions must be text or a list")
    items: list[str] = []
    for line in value.splitlines():
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("-"):
            items.append(stripped.lstrip("-").strip())
        elif items:
            items[-1] = f"{items[-1]} {stripped}"
        else:
            items.append(stripped)
    return tuple(i for i in items if i)


def parse_topology(text: str) -> TopologyConfig:
    """Parse a topology document; unknown keys are warnings, not errors."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise MalformedDocument(str(exc)) from exc
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise MalformedDocument("top level must be a mapping")

    warnings: list[str] = []
    _collect_unknown(doc, _KNOWN_TOP, "$", warnings)

    webapp_active = False
    webapp_version = ""
    webapp = doc.get("webapp") or {}
    if webapp:
        if not isinstance(webapp, dict):
            raise MalformedDocument("webapp must be a mapping")
        _collect_unknown(webapp, _KNOWN_WEBAPP, "webapp", warnings)
        active = webapp.get("active", False)
        if not isinstance(active, bool):
            raise BadValue("webapp.active must be a boolean")
        webapp_active = active
        # the misspelled key predates this runtime; accept both spellings
        raw_version = webapp.get("vesion", webapp.get("version", ""))
        webapp_version = _as_str(raw_version, "webapp.vesion") if raw_version else ""

    twin_version = ""
    twin_replicas = 1
    twin = doc.get("twin") or {}
    if twin:
        if not isinstance(twin, dict):
            raise MalformedDocument("twin must be a mapping")
        _collect_unknown(twin, _KNOWN_TWIN, "twin", warnings)
        if "version" in twin:
            twin_version = _as_str(twin["version"], "twin.version")
        pods = twin.get("podTemplates") or {}
        if "replicaCount" in pods:
            twin_replicas = _as_replicas(pods["replicaCount"], "twin.podTemplates.replicaCount")

    facilitators: list[FacilitatorDecl] = []
    for i, raw in enumerate(doc.get("facilitators") or []):
        where = f"facilitators[{i}]"
        if not isinstance(raw, dict):
            raise MalformedDocument(f"{where} must be a mapping")
        _collect_unknown(raw, _KNOWN_FAC, where, warnings)
        name = _as_name(_require(raw, "name", where), f"{where}.name")
        pods = raw.get("podTemplates") or {}
        replicas = 1
        if "replicaCount" in pods:
            replicas = _as_replicas(pods["replicaCount"], f"{where}.podTemplates.replicaCount")
        facilitators.append(FacilitatorDecl(name=name, replicas=replicas))

    domains: list[DomainDecl] = []
    for i, raw in enumerate(doc.get("domains") or []):
        where = f"domains[{i}]"
        if not isinstance(raw, dict):
            raise MalformedDocument(f"{where} must be a mapping")
        _collect_unknown(raw, _KNOWN_DOMAIN, where, warnings)
        dname = _as_name(_require(raw, "name", where), f"{where}.name")
        agents: list[AgentDecl] = []
        for j, araw in enumerate(raw.get("agents") or []):
            awhere = f"{where}.agents[{j}]"
            if not isinstance(araw, dict):
                raise MalformedDocument(f"{awhere} must be a mapping")
            _collect_unknown(araw, _KNOWN_AGENT, awhere, warnings)
            aname = _as_name(_require(araw, "name", awhere), f"{awhere}.name")
            parent = _as_name(_require(araw, "parent", awhere), f"{awhere}.parent")
            info = _require(araw, "info", awhere)
            if not isinstance(info, dict):
                raise MalformedDocument(f"{awhere}.info must be a mapping")
            _collect_unknown(info, _KNOWN_INFO, f"{awhere}.info", warnings)
            description = _as_str(
                _require(info, "agentDescription", f"{awhere}.info"),
                f"{awhere}.info.agentDescription",
            )
            if not description.strip():
                raise BadValue(f"{awhere}.info.agentDescription must be nonempty")
            questions = split_question_block(info.get("exampleQuestions"))
            agents.append(
                AgentDecl(
                    name=aname,
                    parent=parent,
                    description=description,
                    example_questions=questions,
                )
            )
        domains.append(DomainDecl(name=dname, agents=tuple(agents)))

    return TopologyConfig(
        webapp_active=webapp_active,
        webapp_version=webapp_version,
        twin_version=twin_version,
        twin_replicas=twin_replicas,
        facilitators=tuple(facilitators),
        domains=tuple(domains),
        warnings=warnings,
    )


def render_topology(cfg: TopologyConfig) -> str:
    """Serialize back to the document format (the module's inverse of parse)."""
    doc: dict = {
        "webapp": {"active": cfg.webapp_active, "vesion": cfg.webapp_version},
        "twin": {
            "version": cfg.twin_version,
            "podTemplates": {"replicaCount": cfg.twin_replicas},
        },
        "facilitators": [
            {"name": f.name, "podTemplates": {"replicaCount": f.replicas}}
            for f in cfg.facilitators
        ],
        "domains": [
            {
                "name": d.name,
                "agents": [
                    {
                        "name": a.name,
                        "parent": a.parent,
                        "info": {
                            "agentDescription": a.description,
                            "exampleQuestions": list(a.example_questions),
                        },
                    }
                    for a in d.agents
                ],
            }
            for d in cfg.domains
        ],
    }
    return yaml.safe_dump(doc, sort_keys=False, allow_unicode=True)


# --- validation ----------------------------------------------------------------


def validation_errors(cfg: TopologyConfig) -> list:
    """All structural errors in ``cfg``, in a deterministic order."""
    errors: list = []
    seen: set[str] = {TWIN_NAME}

    def claim(name: str):
        if name in seen:
            errors.append(DuplicateName(name))
        seen.add(name)

    for f in cfg.facilitators:
        claim(f.name)
    for d in cfg.domains:
        claim(d.name)
        for a in d.agents:
            claim(a.name)

    facilitator_names = {f.name for f in cfg.facilitators}
    agent_names = {a.name for d in cfg.domains for a in d.agents}
    parent_of: dict[str, str] = {}
    for d in cfg.domains:
        for a in d.agents:
            parent_of[a.name] = a.parent
            if a.parent not in facilitator_names and a.parent not in agent_names:
                errors.append(UnknownParent(a.name, a.parent))

    # cycle check: follow parent chains through agents; facilitators are
    # terminal, so any revisited agent closes a cycle
    resolved: set[str] = set()
    for d in cfg.domains:
        for a in d.agents:
            if a.name in resolved:
                continue
            path: list[str] = []
            pos: dict[str, int] = {}
            cur = a.name
            while True:
                if cur in resolved:
                    break
                if cur in pos:
                    errors.append(CycleDetected(path[pos[cur]:]))
                    break
                pos[cur] = len(path)
                path.append(cur)
                parent = parent_of.get(cur)
                if parent is None or parent not in parent_of:
                    break
                cur = parent
            resolved.update(path)
    return errors


def validate_topology(cfg: TopologyConfig) -> ValidatedTopology:
    """Build the node forest; raises the first structural error found."""
    errors = validation_errors(cfg)
    if errors:
        raise errors[0]

    nodes: dict[str, Node] = {TWIN_NAME: Node(name=TWIN_NAME, role=ROLE_TWIN)}
    for f in cfg.facilitators:
        nodes[f.name] = Node(name=f.name, role=ROLE_FACILITATOR)
    for d in cfg.domains:
        for a in d.agents:
            nodes[a.name] = Node(
                name=a.name, role=ROLE_DOMAIN_AGENT, parent=a.parent, domain=d.name
            )
    for node in nodes.values():
        if node.parent:
            nodes[node.parent].children.append(node.name)
    for node in nodes.values():
        node.children.sort()

    return ValidatedTopology(
        nodes=nodes,
        root_facilitators=[f.name for f in cfg.facilitators],
    )
