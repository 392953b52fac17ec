"""Session service: query fencing, label submission, snapshots, finalize."""

import numpy as np
import pytest
from fastapi.testclient import TestClient

from splitlabel.bound import NodeStats, maximize_bound
from splitlabel.data import Dataset, export_labels_text, gen_blobs, simulated_oracle
from splitlabel.engine import Engine, RunConfig
from splitlabel.service import create_app
from splitlabel.splitters import SplitterConfig

BLOBS = gen_blobs(31, 80, 2, 2)
UNLABELED = Dataset(features=BLOBS.features.copy())


@pytest.fixture
def client(tmp_path):
    app = create_app({"blobs": BLOBS, "raw": UNLABELED},
                     checkpoint_dir=str(tmp_path / "ckpt"))
    with TestClient(app) as test_client:
        yield test_client


def make_session(client, budget=6, **config):
    payload = {"dataset": "blobs",
               "config": {"budget": budget, "seed": 7, **config}}
    response = client.post("/sessions", json=payload)
    assert response.status_code == 200, response.text
    return response.json()


def answer_until_finished(client, session_id, max_queries=500):
    """Scripted ground-truth labeler; returns the number of answers given."""
    answered = 0
    for _ in range(max_queries):
        query = client.get(f"/sessions/{session_id}/query").json()
        if query["status"] != "awaiting_label":
            return answered
        response = client.post(
            f"/sessions/{session_id}/labels",
            json={"query_id": query["query_id"],
                  "label": int(BLOBS.truth[query["example_id"]])},
        )
        assert response.status_code == 200, response.text
        answered += 1
    raise AssertionError("session never finished")


def test_health(client):
    body = client.get("/health").json()
    assert body["status"] == "ok"


def test_create_session_awaits_label(client):
    created = make_session(client)
    assert created["status"] == "awaiting_label"
    assert created["num_classes"] == 2
    assert created["config"]["budget"] == 6

    query = client.get(f"/sessions/{created['session_id']}/query").json()
    assert query["query_id"] == 1
    assert 0 <= query["example_id"] < 80
    assert len(query["features"]) == 2
    assert query["budget_remaining"] == 6


def test_zero_budget_finishes_immediately(client):
    created = make_session(client, budget=0)
    assert created["status"] == "finished"
    query = client.get(f"/sessions/{created['session_id']}/query").json()
    assert query == {"status": "finished"}


def test_unknown_dataset_and_session(client):
    assert client.post("/sessions", json={"dataset": "nope"}).status_code == 404
    assert client.get("/sessions/missing/query").status_code == 404


def test_query_idempotent_until_answered(client):
    created = make_session(client)
    sid = created["session_id"]
    first = client.get(f"/sessions/{sid}/query").json()
    second = client.get(f"/sessions/{sid}/query").json()
    assert first["query_id"] == second["query_id"]
    assert first["example_id"] == second["example_id"]


def test_stale_query_id_conflict(client):
    created = make_session(client)
    sid = created["session_id"]
    response = client.post(f"/sessions/{sid}/labels",
                           json={"query_id": 999, "label": 0})
    assert response.status_code == 409
    # the real query is still answerable
    query = client.get(f"/sessions/{sid}/query").json()
    assert query["status"] == "awaiting_label"


def test_out_of_range_label_rejected_without_charge(client):
    created = make_session(client)
    sid = created["session_id"]
    query = client.get(f"/sessions/{sid}/query").json()
    response = client.post(f"/sessions/{sid}/labels",
                           json={"query_id": query["query_id"], "label": 5})
    assert response.status_code == 422
    after = client.get(f"/sessions/{sid}/query").json()
    assert after["budget_remaining"] == 6
    assert after["query_id"] == query["query_id"]


def test_submit_advances_and_reports_state(client):
    created = make_session(client)
    sid = created["session_id"]
    query = client.get(f"/sessions/{sid}/query").json()
    body = client.post(
        f"/sessions/{sid}/labels",
        json={"query_id": query["query_id"],
              "label": int(BLOBS.truth[query["example_id"]])},
    ).json()
    assert body["accepted_query_id"] == query["query_id"]
    assert body["budget_remaining"] == 5
    assert body["step_index"] >= 1
    assert sum(leaf["N"] for leaf in body["leaves"]) == 80


def test_state_snapshot_consistency(client):
    created = make_session(client, budget=10)
    sid = created["session_id"]
    answer_until_finished(client, sid)
    state = client.get(f"/sessions/{sid}/state").json()
    assert state["status"] == "finished"
    assert state["budget_remaining"] == 0
    total = sum(
        maximize_bound(NodeStats(m=leaf["m"], n=leaf["n"], N=leaf["N"])).value
        for leaf in state["leaves"]
    )
    assert state["total_bound"] == pytest.approx(total, abs=1e-9)
    assert state["bound_curve"] == sorted_monotone_steps(state)
    assert len(state["bound_curve"]) == state["step_index"]


def sorted_monotone_steps(state):
    # step indices in the history tail must increase one by one
    tail = state["history_tail"]
    assert [r["step_index"] for r in tail] == sorted(r["step_index"] for r in tail)
    return state["bound_curve"]


def test_scripted_session_matches_cli_engine(client):
    # Oracle-bridge equivalence: a scripted human answering with ground truth
    # must reproduce the simulated-oracle run byte for byte.
    config = RunConfig(budget=12, seed=7,
                       splitter=SplitterConfig(kind="kmeans2", seed=7))
    reference_engine = Engine(config, BLOBS, simulated_oracle(BLOBS))
    reference_assignment, _ = reference_engine.run()
    expected_csv = export_labels_text(reference_assignment)

    created = make_session(client, budget=12)
    sid = created["session_id"]
    answer_until_finished(client, sid)
    exported = client.post(f"/sessions/{sid}/finalize")
    assert exported.status_code == 200
    assert exported.text == expected_csv


def test_finalize_idempotent_and_midway(client):
    created = make_session(client, budget=40)
    sid = created["session_id"]
    for _ in range(3):
        query = client.get(f"/sessions/{sid}/query").json()
        client.post(f"/sessions/{sid}/labels",
                    json={"query_id": query["query_id"],
                          "label": int(BLOBS.truth[query["example_id"]])})
    first = client.post(f"/sessions/{sid}/finalize")
    second = client.post(f"/sessions/{sid}/finalize")
    assert first.text == second.text
    oracle_rows = [line for line in first.text.splitlines() if ",oracle," in line]
    assert len(oracle_rows) == 3
    state = client.get(f"/sessions/{sid}/state").json()
    assert state["status"] == "finished"


def test_unlabeled_dataset_requires_num_classes(client):
    response = client.post("/sessions", json={"dataset": "raw",
                                              "config": {"budget": 2}})
    assert response.status_code == 400

    created = client.post("/sessions", json={
        "dataset": "raw", "num_classes": 3, "config": {"budget": 2, "seed": 1},
    }).json()
    sid = created["session_id"]
    for _ in range(2):
        query = client.get(f"/sessions/{sid}/query").json()
        assert query["num_classes"] == 3
        client.post(f"/sessions/{sid}/labels",
                    json={"query_id": query["query_id"], "label": 2})
    final = client.post(f"/sessions/{sid}/finalize")
    assert ",oracle," in final.text


def test_checkpoint_written(client, tmp_path):
    created = make_session(client, budget=5)
    sid = created["session_id"]
    query = client.get(f"/sessions/{sid}/query").json()
    client.post(f"/sessions/{sid}/labels",
                json={"query_id": query["query_id"],
                      "label": int(BLOBS.truth[query["example_id"]])})
    checkpoint = tmp_path / "ckpt" / f"{sid}.json"
    assert checkpoint.exists()


def test_bad_config_rejected(client):
    response = client.post("/sessions", json={
        "dataset": "blobs", "config": {"budget": -3},
    })
    assert response.status_code == 400
