"""Gateway contracts: schemas, isolation, terminal events, the stream."""

from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

from agoranet.gateway import create_app
from agoranet.scenario import load_scenario, shipped_scenario_path

FIG3_QUESTION = "What salary should we offer and what are the candidate's past experiences?"


@pytest.fixture(scope="module")
def client():
    scenario = load_scenario(shipped_scenario_path("fig3-hr-cv"))
    app = create_app(scenario.cfg, kb=scenario.kb)
    return TestClient(app)


def _session(client, attrs=None):
    response = client.post("/sessions", json={"attrs": attrs or {"division": "hr"}})
    assert response.status_code == 200
    return response.json()["session_id"]


def _events(client, session_id):
    response = client.get(f"/sessions/{session_id}/events", params={"once": True})
    assert response.status_code == 200
    return [json.loads(line[len("data: "):])
            for line in response.text.splitlines() if line.startswith("data: ")]


class TestSessions:
    def test_create_session_id_is_long_random(self, client):
        a, b = _session(client), _session(client)
        assert a != b
        assert len(a) == 32  # 128 bits hex

    def test_bad_attrs_rejected(self, client):
        response = client.post("/sessions", json={"attrs": {"BAD": "x"}})
        assert response.status_code == 400
        assert response.json()["code"] == "BadAttributes"
        response = client.post("/sessions", json={"attrs": {"n": 7}})
        assert response.status_code == 400

    def test_unknown_session(self, client):
        response = client.post("/sessions/feed/messages", json={"text": "hi"})
        assert response.status_code == 404
        assert response.json()["code"] == "UnknownSession"


class TestMessages:
    def test_fig3_flow_over_http(self, client):
        session_id = _session(client)
        response = client.post(f"/sessions/{session_id}/messages",
                               json={"text": FIG3_QUESTION})
        assert response.status_code == 200
        request_id = response.json()["request_id"]

        trace = client.get(f"/sessions/{session_id}/trace",
                           params={"request": request_id}).json()
        assert trace["agents_involved"] == [
            "facilitator", "isp-cv-expert", "isp-hr-expert", "twin"]
        assert trace["records"][0]["seq"] >= 1

        events = _events(client, session_id)
        terminal = [e for e in events if e["type"] in ("answer", "publish", "failure")]
        assert terminal and terminal[-1]["request_id"] == request_id
        payload = terminal[-1]["payload"]
        assert "standard salary range" in payload["text"]
        assert any(c.startswith("hr-") for c in payload["citations"])
        assert any(c.startswith("cv-") for c in payload["citations"])

    def test_empty_message_rejected(self, client):
        session_id = _session(client)
        response = client.post(f"/sessions/{session_id}/messages",
                               json={"text": "  "})
        assert response.status_code == 400
        assert response.json()["code"] == "EmptyMessage"

    def test_every_request_reaches_a_terminal_event(self, client):
        session_id = _session(client)
        rids = []
        for text in (FIG3_QUESTION,
                     "Draft a short onboarding plan for the new analyst.",
                     "What benefits and extra compensation can the candidate expect?"):
            rids.append(client.post(f"/sessions/{session_id}/messages",
                                    json={"text": text}).json()["request_id"])
        # a prompted request is not terminal until the human answers
        for event in _events(client, session_id):
            if event["type"] == "prompt":
                client.post(f"/sessions/{session_id}/integrations",
                            json={"request_id": event["request_id"],
                                  "text": "the hr compensation policy"})
        events = _events(client, session_id)
        for rid in rids:
            terminal = [e for e in events if e["request_id"] == rid
                        and e["type"] in ("answer", "publish", "failure")]
            assert terminal, f"no terminal event for {rid}"


class TestIntegrationFlow:
    def test_prompt_reply_resume(self, client):
        scenario = load_scenario(shipped_scenario_path("integration-parsimony"))
        app = create_app(scenario.cfg, kb=scenario.kb)
        local = TestClient(app)
        session_id = _session(local)
        rid = local.post(f"/sessions/{session_id}/messages",
                         json={"text": scenario.turns[0]}).json()["request_id"]
        events = _events(local, session_id)
        prompts = [e for e in events if e["type"] == "prompt"]
        assert prompts and prompts[0]["request_id"] == rid

        response = local.post(f"/sessions/{session_id}/integrations",
                              json={"request_id": rid,
                                    "text": "an hr compensation specialist position"})
        assert response.status_code == 200
        events = _events(local, session_id)
        answers = [e for e in events if e["type"] == "answer"]
        assert answers and answers[-1]["request_id"] == rid
        assert "standard salary range" in answers[-1]["payload"]["text"]

    def test_no_outstanding_integration(self, client):
        session_id = _session(client)
        response = client.post(f"/sessions/{session_id}/integrations",
                               json={"request_id": "r0001", "text": "x"})
        assert response.status_code == 409
        assert response.json()["code"] == "NoOutstandingIntegration"


class TestIsolation:
    def test_cross_session_trace_rejected(self, client):
        session_a = _session(client)
        session_b = _session(client)
        rid = client.post(f"/sessions/{session_a}/messages",
                          json={"text": FIG3_QUESTION}).json()["request_id"]
        response = client.get(f"/sessions/{session_b}/trace",
                              params={"request": rid})
        assert response.status_code == 404
        assert response.json()["code"] == "UnknownRequest"

    def test_cross_session_agora_rejected(self, client):
        session_a = _session(client)
        session_b = _session(client)
        client.post(f"/sessions/{session_a}/messages",
                    json={"text": "Draft a welcome note for the analyst."})
        board = client.get(f"/sessions/{session_a}/agora/agora-1")
        assert board.status_code == 200
        assert board.json()["published"]
        response = client.get(f"/sessions/{session_b}/agora/agora-1")
        assert response.status_code == 404
        assert response.json()["code"] == "NotYourBoard"

    def test_web_operations_tracked_outside_user_requests(self, client):
        session_id = _session(client)
        rid = client.post(f"/sessions/{session_id}/messages",
                          json={"text": FIG3_QUESTION}).json()["request_id"]
        trace = client.get(f"/sessions/{session_id}/trace",
                           params={"request": rid}).json()
        assert "web" not in trace["agents_involved"]


class TestStream:
    def test_event_frames_are_json_with_required_fields(self, client):
        session_id = _session(client)
        client.post(f"/sessions/{session_id}/messages", json={"text": FIG3_QUESTION})
        for event in _events(client, session_id):
            assert set(event) == {"type", "request_id", "payload"}

    def test_after_cursor_skips_earlier_events(self, client):
        session_id = _session(client)
        client.post(f"/sessions/{session_id}/messages", json={"text": FIG3_QUESTION})
        everything = _events(client, session_id)
        response = client.get(f"/sessions/{session_id}/events",
                              params={"once": True, "after": 1})
        later = [json.loads(line[len("data: "):])
                 for line in response.text.splitlines() if line.startswith("data: ")]
        assert len(later) == len(everything) - 1

    def test_healthz(self, client):
        response = client.get("/healthz")
        assert response.status_code == 200
        assert response.json()["status"] == "ok"
