"""Topology document parsing, validation, and the render round-trip."""

from __future__ import annotations

import random

import pytest

from agoranet.errors import (
    BadValue,
    CycleDetected,
    DuplicateName,
    MalformedDocument,
    MissingField,
    UnknownParent,
)
from agoranet.topology import (
    AgentDecl,
    DomainDecl,
    FacilitatorDecl,
    TopologyConfig,
    parse_topology,
    render_topology,
    validate_topology,
    validation_errors,
)
from tests.conftest import random_config


class TestParse:
    def test_reference_document(self, listing1_text):
        cfg = parse_topology(listing1_text)
        assert cfg.twin_replicas == 2
        assert cfg.webapp_version == "0.1.1.dev33"
        assert cfg.webapp_active is True
        assert [f.name for f in cfg.facilitators] == ["facilitator"]
        assert [f.replicas for f in cfg.facilitators] == [1]
        assert [d.name for d in cfg.domains] == ["hr-domain", "cv-domain"]
        agents = [a for d in cfg.domains for a in d.agents]
        assert [a.name for a in agents] == ["isp-hr-expert", "isp-cv-expert"]
        assert all(a.parent == "facilitator" for a in agents)
        assert len(agents[0].example_questions) == 3
        assert agents[0].example_questions[0].startswith("What is an appropriate")

    def test_both_version_spellings_accepted(self):
        for key in ("vesion", "version"):
            cfg = parse_topology(f"webapp:\n  active: false\n  {key}: 9.9.9\n")
            assert cfg.webapp_version == "9.9.9"

    def test_empty_domains_ok(self):
        cfg = parse_topology(
            "facilitators:\n  - name: fac\n    podTemplates:\n      replicaCount: 1\ndomains: []\n"
        )
        assert cfg.domains == ()
        assert cfg.facilitators[0].name == "fac"

    def test_agent_missing_name(self):
        doc = (
            "facilitators:\n  - name: fac\n"
            "domains:\n  - name: d\n    agents:\n"
            "      - parent: fac\n        info:\n          agentDescription: x\n"
        )
        with pytest.raises(MissingField):
            parse_topology(doc)

    def test_bad_replicas(self):
        doc = "twin:\n  podTemplates:\n    replicaCount: 0\n"
        with pytest.raises(BadValue):
            parse_topology(doc)

    def test_syntax_error(self):
        with pytest.raises(MalformedDocument):
            parse_topology("webapp: [unclosed\n  whoops: ]]")

    def test_unknown_keys_are_warnings(self):
        cfg = parse_topology("webapp:\n  active: true\n  colour: blue\nextra: 1\n")
        assert any("colour" in w for w in cfg.warnings)
        assert any("extra" in w for w in cfg.warnings)

    def test_question_block_parsing(self):
        doc = (
            "facilitators:\n  - name: fac\n"
            "domains:\n  - name: d\n    agents:\n"
            "      - name: a\n        parent: fac\n        info:\n"
            "          agentDescription: desc\n"
            "          exampleQuestions: |\n"
            "            - first question\n"
            "              continued on next line\n"
            "            - second question\n"
        )
        cfg = parse_topology(doc)
        questions = cfg.domains[0].agents[0].example_questions
        assert questions == ("first question continued on next line", "second question")


class TestValidate:
    def test_reference_tree(self, listing1_text):
        topo = validate_topology(parse_topology(listing1_text))
        fac = topo.nodes["facilitator"]
        assert fac.children == ["isp-cv-expert", "isp-hr-expert"]  # sorted
        assert fac.facilitator_capable
        assert topo.nodes["isp-hr-expert"].domain == "hr-domain"
        assert topo.root_facilitators == ["facilitator"]
        assert topo.nodes["twin"].role == "twin"

    def test_self_loop(self):
        cfg = TopologyConfig(
            facilitators=(FacilitatorDecl("fac"),),
            domains=(DomainDecl("d", (AgentDecl("a", "a", "desc"),)),),
        )
        with pytest.raises(CycleDetected) as exc:
            validate_topology(cfg)
        assert exc.value.path == ["a"]

    def test_three_cycle_matches_dfs_oracle(self):
        cfg = TopologyConfig(
            facilitators=(FacilitatorDecl("fac"),),
            domains=(
                DomainDecl(
                    "d",
                    (
                        AgentDecl("a", "b", "x"),
                        AgentDecl("b", "c", "x"),
                        AgentDecl("c", "a", "x"),
                    ),
                ),
            ),
        )
        with pytest.raises(CycleDetected):
            validate_topology(cfg)
        # independent oracle: DFS over the declared parent map
        parent = {"a": "b", "b": "c", "c": "a"}

        def has_cycle():
            for start in parent:
                seen = set()
                cur = start
                while cur in parent:
                    if cur in seen:
                        return True
                    seen.add(cur)
                    cur = parent[cur]
            return False

        assert has_cycle()

    def test_unknown_parent(self):
        cfg = TopologyConfig(
            facilitators=(FacilitatorDecl("fac"),),
            domains=(DomainDecl("d", (AgentDecl("a", "ghost", "desc"),)),),
        )
        with pytest.raises(UnknownParent) as exc:
            validate_topology(cfg)
        assert exc.value.agent == "a"
        assert exc.value.parent == "ghost"

    def test_duplicate_name(self):
        cfg = TopologyConfig(
            facilitators=(FacilitatorDecl("fac"), FacilitatorDecl("fac")),
        )
        with pytest.raises(DuplicateName):
            validate_topology(cfg)

    def test_twin_name_reserved(self):
        cfg = TopologyConfig(facilitators=(FacilitatorDecl("twin"),))
        with pytest.raises(DuplicateName):
            validate_topology(cfg)

    def test_forest_property_on_random_configs(self):
        """|edges| equals |nodes with a parent| and DFS visits each node once."""
        rng = random.Random(101)
        for _ in range(100):
            cfg = random_config(rng)
            topo = validate_topology(cfg)
            edges = sum(len(n.children) for n in topo.nodes.values())
            with_parent = sum(1 for n in topo.nodes.values() if n.parent)
            assert edges == with_parent
            seen: list[str] = []

            def dfs(name):
                seen.append(name)
                for child in topo.nodes[name].children:
                    dfs(child)

            for root in topo.root_facilitators:
                dfs(root)
            agents_and_facs = [n for n in topo.nodes if n != "twin"]
            assert sorted(seen) == sorted(agents_and_facs)


class TestRoundTrip:
    def test_reference_round_trip(self, listing1_text):
        cfg = parse_topology(listing1_text)
        assert parse_topology(render_topology(cfg)) == cfg

    def test_generated_round_trip(self):
        rng = random.Random(2024)
        for _ in range(250):
            cfg = random_config(rng)
            assert not validation_errors(cfg)
            assert parse_topology(render_topology(cfg)) == cfg
