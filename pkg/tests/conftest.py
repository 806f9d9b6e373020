"""Shared fixtures: the reference topology document and seeded generators."""

from __future__ import annotations

import random

import pytest

from agoranet import acl
from agoranet.topology import (
    AgentDecl,
    DomainDecl,
    FacilitatorDecl,
    TopologyConfig,
)

# The reference deployment-values document, field for field (including the
# historical 'vesion' spelling).
LISTING1 = '''webapp:
  active: true
  vesion: 0.1.1.dev33

twin:
  version: 0.1.1.dev33
  podTemplates:
    replicaCount: 2

facilitators:
  - name: "facilitator"
    podTemplates:
      replicaCount: 1

domains:
  - name: "hr-domain"
    agents:
      - name: "isp-hr-expert"
        parent: "facilitator"
        info:
          agentDescription: |
              HR Assistant provides information regarding salaries, benefits,
              compensation policies, and other HR-related issues, helping to
              determine a competitive and appropriate  salary offer.
          exampleQuestions: |
              - What is an appropriate starting salary for the candidate?
              - What benefits and extra compensation can the candidate expect?
              - What is the standard salary range for this position in our company?
  - name: "cv-domain"
    agents:
      - name: "isp-cv-expert"
        parent: "facilitator"
        info:
          agentDescription: |
            CV Assistant manages candidates' resumes and provides detailed
            information about them, such as their work experience, education,
            and references.
          exampleQuestions: |
            - Who is the candidate and do we have their resume?
            - Can you provide me with a copy of the candidate's resume?
            - What are the candidate's past work experiences?
'''


@pytest.fixture
def listing1_text() -> str:
    return LISTING1


_WORDS = (
    "ledger payroll invoice contract onboarding travel expense policy audit "
    "pension laptop badge credential mentor rota shift bonus appraisal leave "
    "procurement vendor settlement mortgage compliance telemetry roster"
).split()


def random_config(rng: random.Random) -> TopologyConfig:
    """A structurally valid topology with unique names and a proper forest."""
    naming = iter(range(10_000))

    def name(prefix):
        return f"{prefix}-{next(naming)}"

    def words(lo, hi):
        return " ".join(rng.choice(_WORDS) for _ in range(rng.randint(lo, hi)))

    facilitators = tuple(
        FacilitatorDecl(name=name("fac"), replicas=rng.randint(1, 3))
        for _ in range(rng.randint(1, 2))
    )
    domains = []
    for _ in range(rng.randint(0, 3)):
        agents = []
        parent_pool = [f.name for f in facilitators]
        for _ in range(rng.randint(0, 3)):
            agent_name = name("agent")
            agents.append(
                AgentDecl(
                    name=agent_name,
                    parent=rng.choice(parent_pool),
                    description=words(3, 8),
                    example_questions=tuple(
                        words(2, 6) for _ in range(rng.randint(0, 3))
                    ),
                )
            )
            parent_pool.append(agent_name)  # allows local-facilitator chains
        domains.append(DomainDecl(name=name("dom"), agents=tuple(agents)))
    return TopologyConfig(
        webapp_active=rng.random() < 0.5,
        webapp_version=f"0.{rng.randint(0, 9)}.{rng.randint(0, 99)}",
        twin_version=f"1.{rng.randint(0, 9)}.{rng.randint(0, 99)}",
        twin_replicas=rng.randint(1, 4),
        facilitators=facilitators,
        domains=tuple(domains),
    )


_ATTR_NAMES = ["role", "division", "dept", "region"]
_ATTR_VALUES = ["v0", "v1", "v2", "v3"]


def random_condition(rng: random.Random, depth: int = 3) -> acl.RoleCondition:
    """Random condition over at most four attributes."""
    roll = rng.random()
    if depth <= 0 or roll < 0.45:
        kind = rng.random()
        if kind < 0.08:
            return acl.TrueCond()
        if kind < 0.16:
            return acl.FalseCond()
        attr = rng.choice(_ATTR_NAMES)
        op = rng.choice(["==", "!=", "in"])
        if op == "in":
            n = rng.randint(1, 3)
            return acl.Atom(attr, "in", tuple(rng.sample(_ATTR_VALUES, n)))
        return acl.Atom(attr, op, rng.choice(_ATTR_VALUES))
    if roll < 0.65:
        return acl.Not(random_condition(rng, depth - 1))
    node = acl.And if roll < 0.85 else acl.Or
    return node(
        tuple(random_condition(rng, depth - 1) for _ in range(rng.randint(2, 3)))
    )


def random_attrs(rng: random.Random) -> dict[str, str]:
    """Each attribute independently missing or set to a random value."""
    attrs = {}
    for attr in _ATTR_NAMES:
        if rng.random() < 0.5:
            attrs[attr] = rng.choice(_ATTR_VALUES)
    return attrs


def oracle_eval(cond: acl.RoleCondition, attrs: dict[str, str]) -> bool:
    """Independent evaluator: substitute atom truths, reduce via Python eval."""

    def expr(node) -> str:
        if isinstance(node, acl.TrueCond):
            return "True"
        if isinstance(node, acl.FalseCond):
            return "False"
        if isinstance(node, acl.Atom):
            value = attrs.get(node.attribute)
            if value is None:
                truth = False
            elif node.op == "==":
                truth = value == node.value
            elif node.op == "!=":
                truth = value != node.value
            else:
                truth = value in node.value
            return str(truth)
        if isinstance(node, acl.Not):
            return f"(not {expr(node.child)})"
        joiner = " and " if isinstance(node, acl.And) else " or "
        return "(" + joiner.join(expr(c) for c in node.children) + ")"

    return bool(eval(expr(cond)))  # noqa: S307 - test oracle on generated text
