"""Twin behavior: routing, humanization, memory, deferred retry."""

from __future__ import annotations

import pytest

from agoranet.bus import MessageKind, TraceAction
from agoranet.context import RuntimeOptions
from agoranet.errors import NoOutstandingIntegration
from agoranet.kb import KnowledgeBase, make_item
from agoranet.runtime import Network
from agoranet.scenario import load_scenario, run_scenario, shipped_scenario_path
from agoranet.topology import parse_topology, validate_topology
from agoranet.twin import SessionMemory, classify_message, error_templates, humanize


class TestClassify:
    @pytest.mark.parametrize("message", [
        "What is the standard salary range for this position?",
        "Who is the candidate and do we have their resume?",
        "salary details please",
    ])
    def test_questions(self, message):
        assert classify_message(message) == "question"

    @pytest.mark.parametrize("message", [
        "Draft an offer for the candidate",
        "Create a welcome pack",
        "Prepare the quarterly summary",
        "Schedule the onboarding call",
    ])
    def test_tasks(self, message):
        assert classify_message(message) == "task"

    def test_verb_must_lead(self):
        # an imperative verb later in the sentence does not make it a task
        assert classify_message("What should I draft first?") == "question"


class TestHumanize:
    def test_domain_unavailable_exact_wording(self):
        assert humanize("DomainUnavailable", "hr-domain") == (
            "The HR service is temporarily unavailable. "
            "I've saved your request and will retry."
        )

    def test_acl_denied_all_exact_wording(self):
        assert humanize("AclDeniedAll") == (
            "I don't have anything I'm allowed to share on that topic."
        )

    def test_unknown_code_falls_back(self):
        assert humanize("SomethingNew") == error_templates()["default"]

    def test_every_shipped_code_has_plain_text(self):
        for code, template in error_templates().items():
            rendered = template.format(detail="hr-domain", service="HR")
            assert rendered
            assert "{" not in rendered


class TestMemory:
    def test_newest_first(self):
        memory = SessionMemory("s1")
        memory.store("position", "analyst", 1)
        memory.store("position", "senior analyst", 2)
        assert memory.recall("position") == "senior analyst"

    def test_absent_key(self):
        assert SessionMemory("s1").recall("ghost") is None

    def test_matching_facts_by_token_overlap(self):
        memory = SessionMemory("s1")
        memory.store("position opening", "senior analyst", 1)
        memory.store("travel policy", "fly economy", 2)
        matches = memory.matching_facts({"position", "title"})
        assert matches == [("position opening", "senior analyst")]


def _network(listing1_text, **kwargs):
    cfg = parse_topology(listing1_text)
    topo = validate_topology(cfg)
    kb = kwargs.pop("kb", None) or KnowledgeBase([
        make_item("hr-001", "hr-domain",
                  "The standard salary range is 55,000 to 70,000 euro.",
                  'division == "hr"'),
    ])
    return Network(cfg=cfg, topology=topo, kb=kb,
                   attrs=kwargs.pop("attrs", {"division": "hr"}), **kwargs)


class TestRouting:
    def test_empty_message_rejected_without_envelope(self, listing1_text):
        network = _network(listing1_text)
        sent_before = network.trace.count(TraceAction.SENT)
        assert network.post_user_message("   ") is None
        assert network.trace.count(TraceAction.SENT) == sent_before
        assert network.transcript[-1]["kind"] == "notice"
        assert network.transcript[-1]["code"] == "EmptyMessage"

    def test_question_goes_to_facilitator(self, listing1_text):
        network = _network(listing1_text)
        rid = network.post_user_message("What is the standard salary range?")
        sent = [r for r in network.trace.for_request(rid)
                if r.action == TraceAction.SENT and r.actor == "twin"]
        assert sent[0].detail == "UserQuery->facilitator"

    def test_task_goes_to_fresh_mediator(self, listing1_text):
        network = _network(listing1_text)
        rid = network.post_user_message("Draft a note about parking")
        sent = [r for r in network.trace.for_request(rid)
                if r.action == TraceAction.SENT and r.actor == "twin"]
        assert sent[0].detail == "TaskRequest->mediator-1"

    def test_exactly_one_envelope_per_nonempty_input(self, listing1_text):
        network = _network(listing1_text)
        for message in ("What about benefits?", "Draft me a memo", "hello there"):
            rid = network.post_user_message(message)
            first_hop = [r for r in network.trace.for_request(rid)
                         if r.action == TraceAction.SENT and r.actor == "twin"
                         and "->" in r.detail
                         and r.detail.split("->")[0] in ("UserQuery", "TaskRequest")]
            assert len(first_hop) == 1
            network.drain()

    def test_no_upstream_for_questions(self, listing1_text):
        cfg = parse_topology("facilitators: []\ndomains: []\n")
        topo = validate_topology(cfg)
        network = Network(cfg=cfg, topology=topo, kb=KnowledgeBase(), attrs={})
        network.post_user_message("What now?")
        network.drain()
        assert network.transcript[-1]["kind"] == "failure"
        assert network.transcript[-1]["code"] == "NoUpstream"

    def test_session_facts_enrich_requests(self, listing1_text):
        network = _network(listing1_text)
        network.twin.memory_store("salary expectations", "70k")
        rid = network.post_user_message("What salary offer is appropriate?")
        network.drain()
        assert rid is not None  # enrichment happens inside the envelope body


class TestDeferredRetry:
    def _offline_network(self, listing1_text, offline_for=2, offline=False):
        scenario = load_scenario(shipped_scenario_path("deferred-retry"))
        scenario.scripts["isp-hr-expert"].offline_for = offline_for
        scenario.scripts["isp-hr-expert"].offline = offline
        return scenario

    def test_backoff_schedule(self, listing1_text):
        result = run_scenario(self._offline_network(listing1_text))
        deferred = [r.tick for r in result.trace.records
                    if r.action == TraceAction.DEFERRED]
        resubmitted = [r.tick for r in result.trace.records
                       if r.action == TraceAction.RESUBMITTED]
        assert len(deferred) == 1
        start = deferred[0]
        assert resubmitted == [start + 8, start + 24]

    def test_success_after_retries_notifies_once(self, listing1_text):
        result = run_scenario(self._offline_network(listing1_text))
        finals = [e for e in result.transcript
                  if e["kind"] in ("answer", "failure", "publish")]
        assert len(finals) == 1
        assert finals[0]["kind"] == "answer"
        assert "standard salary range" in finals[0]["text"]
        # history recorded the exchange
        assert len(result.network.twin.session.history) == 1

    def test_permanent_outage_exhausts_attempts(self, listing1_text):
        result = run_scenario(
            self._offline_network(listing1_text, offline_for=0, offline=True))
        resubmitted = [r for r in result.trace.records
                       if r.action == TraceAction.RESUBMITTED]
        assert len(resubmitted) == 3
        finals = [e for e in result.transcript
                  if e["kind"] in ("answer", "failure", "publish")]
        assert len(finals) == 1
        assert finals[0]["kind"] == "failure"
        assert finals[0]["code"] == "RetriesExhausted"

    def test_interim_notice_emitted_once(self, listing1_text):
        result = run_scenario(
            self._offline_network(listing1_text, offline_for=0, offline=True))
        notices = [e for e in result.transcript if e["kind"] == "notice"]
        assert len(notices) == 1
        assert "saved your request" in notices[0]["text"]


class TestIntegrationReply:
    def test_reply_without_prompt_rejected(self, listing1_text):
        network = _network(listing1_text)
        with pytest.raises(NoOutstandingIntegration):
            network.answer_integration("r9999", "whatever")

    def test_reply_stores_fact_for_future_parsimony(self):
        scenario = load_scenario(shipped_scenario_path("integration-parsimony"))
        scenario.facts = []
        result = run_scenario(scenario)
        facts = result.network.twin.session.facts
        assert any(key == "position" and "specialist" in value
                   for key, value, _ in facts)
