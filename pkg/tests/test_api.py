from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

from contextcap.annotation import AnnotationStore
from contextcap.api import create_app


class FakeClock:
    def __init__(self):
        self.now = 5000.0

    def __call__(self):
        return self.now


ROWS = [
    {"caption": "Supporters marched peacefully during the protest",
     "context": "City officials reported a calm afternoon downtown.",
     "image_uri": "http://img/1.jpg", "image_id": "img1",
     "source_record_id": "r001"},
    {"caption": "A striker celebrates a late goal",
     "context": "The home side equalised in stoppage time.",
     "image_uri": "http://img/2.jpg"},
]


@pytest.fixture()
def client(tmp_path):
    store = AnnotationStore(tmp_path / "events.jsonl", clock=FakeClock(),
                            fsync=False)
    with TestClient(create_app(store)) as tc:
        yield tc
    store.close()


def _create(client):
    response = client.post("/tasks", json={"instances": ROWS})
    assert response.status_code == 200
    return response.json()["task_ids"]


def test_health(client):
    body = client.get("/health").json()
    assert body["status"] == "ok"
    assert body["version"] == "0.1.0"


def test_create_list_get_flow(client):
    ids = _create(client)
    assert len(ids) == 2

    listed = client.get("/tasks").json()
    assert [row["task_id"] for row in listed] == sorted(ids)
    assert all(row["status"] == "pending" for row in listed)

    task = client.get(f"/tasks/{ids[0]}").json()
    assert task["caption"] == ROWS[0]["caption"]
    assert task["context"] == ROWS[0]["context"]
    assert task["image_uri"] == ROWS[0]["image_uri"]

    again = client.post("/tasks", json={"instances": ROWS}).json()
    assert again == {"created": 0, "skipped": 2, "task_ids": []}


def test_full_annotation_flow_over_http(client):
    tid = _create(client)[0]
    assert client.post(f"/tasks/{tid}/claim",
                       json={"annotator_id": "ann-a"}).status_code == 200

    edited = client.post(f"/tasks/{tid}/edit", json={
        "annotator_id": "ann-a", "start": 19, "end": 29,
        "replacement": "violently"})
    assert edited.status_code == 200
    assert edited.json()["resulting_caption"] == \
        "Supporters marched violently during the protest"

    for_review = client.get("/tasks", params={"reviewer": "ann-b"}).json()
    assert [row["task_id"] for row in for_review] == [tid]
    assert client.get("/tasks", params={"reviewer": "ann-a"}).json() == []

    verified = client.post(f"/tasks/{tid}/verify", json={
        "annotator_id": "ann-b", "verdict": "accept"})
    assert verified.status_code == 200
    assert verified.json()["status"] == "peer_verified"


def test_error_code_mapping(client):
    ids = _create(client)
    tid = ids[0]

    missing = client.post("/tasks/task-0000000000000000/claim",
                          json={"annotator_id": "a"})
    assert missing.status_code == 404

    client.post(f"/tasks/{tid}/claim", json={"annotator_id": "ann-a"})
    conflict = client.post(f"/tasks/{tid}/claim", json={"annotator_id": "ann-b"})
    assert conflict.status_code == 409
    assert "detail" in conflict.json()

    bad_span = client.post(f"/tasks/{tid}/edit", json={
        "annotator_id": "ann-a", "start": 9, "end": 3, "replacement": "x"})
    assert bad_span.status_code == 422

    client.post(f"/tasks/{tid}/edit", json={
        "annotator_id": "ann-a", "start": 19, "end": 29,
        "replacement": "violently"})
    self_verify = client.post(f"/tasks/{tid}/verify", json={
        "annotator_id": "ann-a", "verdict": "accept"})
    assert self_verify.status_code == 403

    unknown_filter = client.get("/tasks", params={"status": "bogus"})
    assert unknown_filter.status_code == 422

    body_shape = client.post(f"/tasks/{ids[1]}/claim", json={})
    assert body_shape.status_code == 422


def test_export_ndjson(client):
    tid = _create(client)[0]
    client.post(f"/tasks/{tid}/claim", json={"annotator_id": "ann-a"})
    client.post(f"/tasks/{tid}/edit", json={
        "annotator_id": "ann-a", "start": 19, "end": 29,
        "replacement": "violently"})
    client.post(f"/tasks/{tid}/verify", json={
        "annotator_id": "ann-b", "verdict": "accept"})

    response = client.get("/export")
    assert response.status_code == 200
    assert response.headers["content-type"].startswith("application/x-ndjson")
    rows = [json.loads(line) for line in response.text.strip().splitlines()]
    assert len(rows) == 1
    assert rows[0]["label"] == "not_entails"
    assert rows[0]["neg_class"] == "Manual"
    assert rows[0]["caption"] == "Supporters marched violently during the protest"

    paired = client.get("/export", params={"pair_positives": "true"})
    lines = paired.text.strip().splitlines()
    assert len(lines) == 2
    labels = {json.loads(line)["label"] for line in lines}
    assert labels == {"entails", "not_entails"}


def test_export_empty_store_is_empty_body(client):
    response = client.get("/export")
    assert response.status_code == 200
    assert response.text == ""


def test_unicode_survives_http_round_trip(client):
    caption = "une fête \U0001f389 au bord du lac"
    created = client.post("/tasks", json={"instances": [
        {"caption": caption, "context": "ctx"}]}).json()
    tid = created["task_ids"][0]
    client.post(f"/tasks/{tid}/claim", json={"annotator_id": "a"})
    start = caption.index("lac")
    edited = client.post(f"/tasks/{tid}/edit", json={
        "annotator_id": "a", "start": start, "end": start + 3,
        "replacement": "fleuve"}).json()
    assert edited["resulting_caption"] == "une fête \U0001f389 au bord du fleuve"
