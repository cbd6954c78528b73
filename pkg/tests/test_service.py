"""HTTP service: session lifecycle, error envelope, persistence."""

import hashlib
import json
import os

import pytest
from fastapi.testclient import TestClient

from conftest import fixture_path, load_fixture
from resto.service import STATE_DIR_ENV, create_app


@pytest.fixture()
def client():
    return TestClient(create_app())


def ring_scenario_doc(**extra):
    doc = load_fixture("scenario_1.json")
    doc["network"] = load_fixture("ring_6bus.json")
    doc.update(extra)
    return doc


def make_session(client, **extra):
    resp = client.post("/sessions", json=ring_scenario_doc(**extra))
    assert resp.status_code == 201
    return resp.json()


def _dir_digest(path):
    parts = []
    for name in sorted(os.listdir(path)):
        with open(os.path.join(path, name), "rb") as fh:
            parts.append(name + ":" + hashlib.sha256(fh.read()).hexdigest())
    return "|".join(parts)


# --- basics -----------------------------------------------------------------

def test_healthz(client):
    resp = client.get("/healthz")
    assert resp.status_code == 200
    assert resp.json() == {"status": "ok", "sessions": 0}
    make_session(client)
    assert client.get("/healthz").json()["sessions"] == 1


def test_create_session_body(client):
    body = make_session(client)
    assert sorted(body) == [
        "history",
        "id",
        "name",
        "network",
        "p_f",
        "recommendation",
        "state",
        "target_bus",
        "terminal",
        "value",
    ]
    assert body["name"] == "scenario_1"
    assert body["state"] == "EUUUUU"
    assert body["recommendation"] == [2]
    assert body["value"] == pytest.approx(2.9048, abs=1e-9)
    assert body["terminal"] is False
    assert body["target_bus"] is None
    assert body["history"] == [{"action": [0], "outcomes": {"0": "E"}}]
    assert body["p_f"] == [0.0, 0.7, 0.4, 0.4, 0.4, 0.4]
    assert body["network"]["buses"][0]["id"] == "b1"


def test_create_session_network_by_path(client):
    doc = load_fixture("scenario_1.json")
    doc["network"] = fixture_path("ring_6bus.json")
    resp = client.post("/sessions", json=doc)
    assert resp.status_code == 201
    assert resp.json()["state"] == "EUUUUU"


def test_get_session(client):
    sid = make_session(client)["id"]
    resp = client.get(f"/sessions/{sid}")
    assert resp.status_code == 200
    assert resp.json()["id"] == sid
    assert resp.json()["state"] == "EUUUUU"


def test_unknown_session_404(client):
    resp = client.get("/sessions/nope")
    assert resp.status_code == 404
    assert resp.json() == {
        "error": {
            "code": "unknown_session",
            "message": "no session 'nope'",
            "path": "session_id",
        }
    }


# --- the observation loop ---------------------------------------------------

def test_observation_flow(client):
    sid = make_session(client)["id"]
    resp = client.post(
        f"/sessions/{sid}/observations",
        json={"action": [2], "outcomes": {"2": "E"}},
    )
    assert resp.status_code == 200
    body = resp.json()
    assert body["state"] == "EUEUUU"
    assert body["recommendation"] == [1, 4]
    assert body["value"] == pytest.approx(2.116, abs=1e-9)

    resp = client.post(
        f"/sessions/{sid}/observations",
        json={"action": [1, 4], "outcomes": {"1": "D", "4": "E"}},
    )
    body = resp.json()
    assert body["state"] == "EDEUEU"
    assert body["recommendation"] == [5]
    assert body["value"] == pytest.approx(1.6, abs=1e-9)

    for action, outcomes in ([5], {"5": "E"}), ([3], {"3": "E"}):
        resp = client.post(
            f"/sessions/{sid}/observations",
            json={"action": action, "outcomes": outcomes},
        )
    body = resp.json()
    assert body["state"] == "EDEEEE"
    assert body["terminal"] is True
    assert body["recommendation"] is None
    assert body["value"] == 0.0
    assert len(body["history"]) == 5


def test_infeasible_observation_409(client):
    sid = make_session(client)["id"]
    resp = client.post(
        f"/sessions/{sid}/observations",
        json={"action": [5], "outcomes": {"5": "E"}},
    )
    assert resp.status_code == 409
    err = resp.json()["error"]
    assert err["code"] == "infeasible"
    assert err["path"] == "action"
    # state is unchanged
    assert client.get(f"/sessions/{sid}").json()["state"] == "EUUUUU"


def test_zero_probability_observation_409(client):
    sid = make_session(client)["id"]
    resp = client.post(
        f"/sessions/{sid}/observations",
        json={"action": [2], "outcomes": {"2": "E"}},
    )
    assert resp.status_code == 200
    # branch 0 already resolved; replaying it is infeasible
    resp = client.post(
        f"/sessions/{sid}/observations",
        json={"action": [0], "outcomes": {"0": "E"}},
    )
    assert resp.status_code == 409


def test_bad_observation_schema_422(client):
    sid = make_session(client)["id"]
    resp = client.post(
        f"/sessions/{sid}/observations",
        json={"action": [2], "outcomes": {"2": "X"}},
    )
    assert resp.status_code == 422
    err = resp.json()["error"]
    assert err["code"] == "schema_violation"
    assert err["path"] == "outcomes.2"


def test_bad_scenario_422(client):
    resp = client.post("/sessions", json={"network": 7, "fragility": {}})
    assert resp.status_code == 422
    assert resp.json()["error"]["path"] == "network"


def test_malformed_json_400(client):
    resp = client.post(
        "/sessions",
        content=b"{not json",
        headers={"content-type": "application/json"},
    )
    assert resp.status_code == 400
    assert resp.json()["error"]["code"] == "malformed_json"


# --- what-if ----------------------------------------------------------------

def test_whatif_probe(client):
    sid = make_session(client)["id"]
    resp = client.get(
        f"/sessions/{sid}/whatif", params={"action": "2", "outcomes": "2=E"}
    )
    assert resp.status_code == 200
    assert resp.json() == {
        "successor": "EUEUUU",
        "remaining": pytest.approx(2.116, abs=1e-9),
        "next_action": [1, 4],
    }
    # colon separator also accepted; damage branch changes the plan
    resp = client.get(
        f"/sessions/{sid}/whatif", params={"action": "2", "outcomes": "2:D"}
    )
    assert resp.json() == {
        "successor": "EUDUUU",
        "remaining": pytest.approx(1.588, abs=1e-9),
        "next_action": [1],
    }
    # probing never moves the session
    assert client.get(f"/sessions/{sid}").json()["state"] == "EUUUUU"


def test_whatif_errors(client):
    sid = make_session(client)["id"]
    resp = client.get(
        f"/sessions/{sid}/whatif", params={"action": "5", "outcomes": "5=E"}
    )
    assert resp.status_code == 409
    resp = client.get(f"/sessions/{sid}/whatif", params={"action": "2"})
    assert resp.status_code == 422
    resp = client.get(
        f"/sessions/{sid}/whatif", params={"action": "{2}", "outcomes": "2=E"}
    )
    assert resp.status_code == 422


# --- retargeting ------------------------------------------------------------

def test_retarget_and_back(client):
    sid = make_session(client)["id"]
    resp = client.post(f"/sessions/{sid}/retarget", json={"bus": "b6"})
    assert resp.status_code == 200
    body = resp.json()
    assert body["target_bus"] == "b6"
    assert body["value"] == pytest.approx(2.3072, abs=1e-9)
    resp = client.post(f"/sessions/{sid}/retarget", json={"bus": None})
    body = resp.json()
    assert body["target_bus"] is None
    assert body["value"] == pytest.approx(2.9048, abs=1e-9)


def test_retarget_errors(client):
    sid = make_session(client)["id"]
    resp = client.post(f"/sessions/{sid}/retarget", json={"bus": "zzz"})
    assert resp.status_code == 422
    assert resp.json()["error"]["code"] == "unknown_bus"
    resp = client.post(f"/sessions/{sid}/retarget", json={})
    assert resp.status_code == 422
    assert resp.json()["error"]["path"] == "bus"


# --- model stats ------------------------------------------------------------

def test_mdp_stats_endpoint(client):
    sid = make_session(client)["id"]
    resp = client.get(f"/sessions/{sid}/mdp/stats")
    assert resp.status_code == 200
    assert resp.json() == {
        "states": 38,
        "actions": 23,
        "terminals": 18,
        "max_depth": 5,
        "simplified": True,
        "forbid_source_island_merge": False,
    }


def test_simplify_false_in_scenario(client):
    body = make_session(client, simplify=False)
    sid = body["id"]
    stats = client.get(f"/sessions/{sid}/mdp/stats").json()
    assert stats["states"] == 51
    assert stats["simplified"] is False


# --- persistence ------------------------------------------------------------

def test_sessions_survive_restart(tmp_path):
    state_dir = str(tmp_path / "state")
    first = TestClient(create_app(state_dir=state_dir))
    sid = make_session(first)["id"]
    first.post(
        f"/sessions/{sid}/observations",
        json={"action": [2], "outcomes": {"2": "E"}},
    )
    first.post(f"/sessions/{sid}/retarget", json={"bus": "b6"})

    second = TestClient(create_app(state_dir=state_dir))
    resp = second.get(f"/sessions/{sid}")
    assert resp.status_code == 200
    body = resp.json()
    assert body["state"] == "EUEUUU"
    assert body["target_bus"] == "b6"
    assert len(body["history"]) == 2
    assert second.get("/healthz").json()["sessions"] == 1


def test_reads_do_not_touch_state_files(tmp_path):
    state_dir = str(tmp_path / "state")
    client = TestClient(create_app(state_dir=state_dir))
    sid = make_session(client)["id"]
    before = _dir_digest(state_dir)
    client.get(f"/sessions/{sid}")
    client.get(f"/sessions/{sid}/mdp/stats")
    client.get(f"/sessions/{sid}/whatif", params={"action": "2", "outcomes": "2=E"})
    client.get("/healthz")
    assert _dir_digest(state_dir) == before


def test_corrupt_state_file_is_quarantined(tmp_path):
    state_dir = tmp_path / "state"
    client = TestClient(create_app(state_dir=str(state_dir)))
    sid = make_session(client)["id"]
    (state_dir / "junk.json").write_text("{broken")

    revived = TestClient(create_app(state_dir=str(state_dir)))
    assert revived.get(f"/sessions/{sid}").status_code == 200
    names = sorted(os.listdir(state_dir))
    assert "junk.json" not in names
    assert "junk.json.quarantined" in names


def test_state_dir_from_environment(tmp_path, monkeypatch):
    state_dir = str(tmp_path / "envstate")
    monkeypatch.setenv(STATE_DIR_ENV, state_dir)
    client = TestClient(create_app())
    sid = make_session(client)["id"]
    assert any(sid in n for n in os.listdir(state_dir))
