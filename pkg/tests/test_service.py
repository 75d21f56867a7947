import json
import os
import threading

import pytest
from fastapi.testclient import TestClient

from relim.service.app import create_app
from relim.service.sessions import SessionManager
from relim.service.store import SessionStore

MIS_TEXT = "nodes: M^3 | P U^2 ; edges: M [U P] | U U"


@pytest.fixture
def client(tmp_path):
    app = create_app(store_path=str(tmp_path), deadline_seconds=30)
    return TestClient(app)


def _create(client, **kwargs):
    r = client.post("/sessions", json=kwargs)
    assert r.status_code == 200, r.text
    return r.json()


def test_create_from_text(client):
    data = _create(client, text=MIS_TEXT)
    assert data["snapshot"].startswith("delta 3 2")
    assert len(data["history"]) == 1


def test_create_from_family_spec(client):
    data = _create(client, family={"delta": 3, "z": [3]})
    assert "L{0.1,0.2,0.3}" in data["snapshot"]


def test_create_malformed_text_422(client):
    r = client.post("/sessions", json={"text": "nodes: A [B ; edges: A A"})
    assert r.status_code == 422
    assert r.json()["code"] == "parse-error"


def test_unknown_session_404(client):
    assert client.get("/sessions/nope").status_code == 404


def test_step_on_fixed_point_flags_it(client):
    data = _create(client, family={"delta": 3, "z": [3]})
    r = client.post(
        f"/sessions/{data['id']}/actions",
        json={"op": "step", "params": {"rename_re": "union", "rename_rere": "intersection"}},
    )
    assert r.status_code == 200
    assert r.json()["summary"]["fixed_point"] is True
    assert r.json()["snapshot"] == data["snapshot"]


def test_relax_action_keeps_invariant(client):
    data = _create(client, text=MIS_TEXT)
    r = client.post(
        f"/sessions/{data['id']}/actions",
        json={
            "op": "relax",
            "params": {
                "actions": [
                    {"kind": "add_configuration", "side": "edge", "configuration": "M M"}
                ]
            },
        },
    )
    assert r.status_code == 200
    assert "M^2" in r.json()["snapshot"]


def test_strengthening_relax_rejected_400(client):
    data = _create(client, text=MIS_TEXT)
    r = client.post(
        f"/sessions/{data['id']}/actions",
        json={
            "op": "relax",
            "params": {
                "actions": [
                    {"kind": "merge_labels", "labels": ["U"], "into": "P"}
                ]
            },
        },
    )
    assert r.status_code == 400


def test_simulate_action_attaches_verifier_report(client):
    data = _create(client, text=MIS_TEXT)
    r = client.post(
        f"/sessions/{data['id']}/actions",
        json={
            "op": "simulate",
            "params": {
                "algorithm": "greedy",
                "defects": [1, 1, 2],
                "instance": {
                    "kind": "random-tree",
                    "delta": 4,
                    "n": 40,
                    "coloring": {"proper": 5},
                    "seed": 3,
                },
            },
        },
    )
    assert r.status_code == 200
    body = r.json()["summary"]
    assert body["verify"]["ok"] is True
    assert body["solution"]["rounds"] <= 5


def test_seek_and_branch_on_edit(client):
    data = _create(client, text=MIS_TEXT)
    sid = data["id"]
    client.post(f"/sessions/{sid}/actions", json={"op": "re", "params": {}})
    client.post(f"/sessions/{sid}/actions", json={"op": "rere", "params": {}})
    r = client.post(f"/sessions/{sid}/seek", json={"cursor": 0})
    assert r.json()["cursor"] == 0
    assert r.json()["snapshot"] == data["snapshot"]
    # acting mid-history truncates the redo tail
    r = client.post(f"/sessions/{sid}/actions", json={"op": "diagram", "params": {"side": "edge"}})
    assert r.status_code == 200
    view = client.get(f"/sessions/{sid}").json()
    assert len(view["history"]) == 2
    ops = [h["action"]["op"] for h in view["history"]]
    assert ops == ["parse", "diagram"]


def test_list_sorted_by_update_time(client):
    ids = [
        _create(client, text=MIS_TEXT, name=f"s{i}")["id"] for i in range(3)
    ]
    client.post(f"/sessions/{ids[0]}/actions", json={"op": "zero-round", "params": {}})
    listing = client.get("/sessions").json()
    assert len(listing) == 3
    assert listing[0]["id"] == ids[0]


def test_replay_endpoint_empty_diff(client):
    data = _create(client, family={"delta": 3, "z": [1, 0]})
    sid = data["id"]
    client.post(f"/sessions/{sid}/actions", json={"op": "re", "params": {}})
    client.post(
        f"/sessions/{sid}/actions",
        json={"op": "sequence", "params": {"policy": "family", "delta": 3, "z": [1, 0], "steps": 2}},
    )
    r = client.get(f"/sessions/{sid}/replay")
    assert r.json() == {"ok": True, "diffs": []}


def test_export_is_canonical_text(client):
    data = _create(client, text=MIS_TEXT)
    text = client.get(f"/sessions/{data['id']}/export").text
    assert text == data["snapshot"]


def test_fork_clones_prefix(client):
    data = _create(client, text=MIS_TEXT)
    sid = data["id"]
    client.post(f"/sessions/{sid}/actions", json={"op": "re", "params": {}})
    fork = client.post(f"/sessions/{sid}/fork", json={"name": "branch"}).json()
    assert fork["id"] != sid
    assert len(fork["history"]) == 2


def test_engine_cap_surfaces_as_409(tmp_path):
    from relim.caps import EngineCaps

    app = create_app(store_path=str(tmp_path), caps=EngineCaps(max_delta_re=2))
    small = TestClient(app)
    data = small.post("/sessions", json={"text": MIS_TEXT}).json()
    r = small.post(f"/sessions/{data['id']}/actions", json={"op": "re", "params": {}})
    assert r.status_code == 409
    assert r.json()["code"] == "cap-exceeded"


def test_relax_dry_run_reports_without_recording(client):
    data = _create(client, text=MIS_TEXT)
    sid = data["id"]
    r = client.post(
        f"/sessions/{sid}/actions",
        json={
            "op": "relax",
            "params": {
                "check_only": True,
                "actions": [{"kind": "merge_labels", "labels": ["U"], "into": "P"}],
            },
        },
    )
    assert r.status_code == 200
    assert r.json()["summary"]["valid"] is False
    view = client.get(f"/sessions/{sid}").json()
    assert len(view["history"]) == 1  # dry runs leave no history events

    # set-labels merge into member supersets
    sets = _create(
        client,
        text="delta 2 2\nnodes:\n<A>^2\n<A,B>^2\nedges:\n<A>^2\n<A> <A,B>\n<A,B>^2\n",
    )
    r2 = client.post(
        f"/sessions/{sets['id']}/actions",
        json={
            "op": "relax",
            "params": {
                "check_only": True,
                "actions": [{"kind": "merge_labels", "labels": ["<A>"], "into": "<A,B>"}],
            },
        },
    )
    assert r2.json()["summary"]["valid"] is True


# ---------------------------------------------------------------------------
# persistence


def test_persist_and_reload(tmp_path):
    manager = SessionManager(str(tmp_path))
    s = manager.create({"text": MIS_TEXT}, name="one")
    manager.apply_action(s.id, "zero-round", {})
    again = SessionManager(str(tmp_path))
    assert s.id in again.sessions
    assert len(again.sessions[s.id].history) == 2
    assert again.sessions[s.id].snapshot() == s.snapshot()


def test_crash_between_actions_leaves_last_completed_durable(tmp_path, monkeypatch):
    manager = SessionManager(str(tmp_path))
    s = manager.create({"text": MIS_TEXT})
    manager.apply_action(s.id, "zero-round", {})

    def boom(*args, **kwargs):
        raise OSError("simulated crash before rename")

    monkeypatch.setattr(os, "replace", boom)
    with pytest.raises(OSError):
        manager.apply_action(s.id, "diagram", {"side": "edge"})
    monkeypatch.undo()

    recovered = SessionManager(str(tmp_path))
    assert len(recovered.sessions[s.id].history) == 2  # crash action not persisted
    assert recovered.replay(s.id) == {"ok": True, "diffs": []}


def test_corrupt_file_skipped_with_warning(tmp_path):
    manager = SessionManager(str(tmp_path))
    a = manager.create({"text": MIS_TEXT})
    b = manager.create({"text": MIS_TEXT})
    path = os.path.join(str(tmp_path), f"{a.id}.json")
    with open(path, "w") as fh:
        fh.write("{ not json")
    again = SessionManager(str(tmp_path))
    assert b.id in again.sessions and a.id not in again.sessions
    assert again.store.warnings


def test_concurrent_actions_on_distinct_sessions(tmp_path):
    manager = SessionManager(str(tmp_path))
    ids = [manager.create({"text": MIS_TEXT}).id for _ in range(4)]
    errors = []

    def work(sid):
        try:
            for _ in range(5):
                manager.apply_action(sid, "zero-round", {})
        except Exception as e:  # pragma: no cover
            errors.append(e)

    threads = [threading.Thread(target=work, args=(sid,)) for sid in ids]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors
    for sid in ids:
        assert len(manager.sessions[sid].history) == 6
        assert manager.replay(sid)["ok"]


def test_serialized_actions_on_one_session(tmp_path):
    manager = SessionManager(str(tmp_path))
    sid = manager.create({"text": MIS_TEXT}).id
    results = []

    def work():
        results.append(manager.apply_action(sid, "zero-round", {})["index"])

    threads = [threading.Thread(target=work) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert sorted(results) == list(range(1, 9))
