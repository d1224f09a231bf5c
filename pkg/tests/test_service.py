import json
import time
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from mdworkbench.llm import scripted_gateway
from mdworkbench.service import ServiceConfig, create_app

from conftest import action_block, final_block


def parse_sse(text: str) -> list[tuple[int, str, dict]]:
    events = []
    for block in text.strip().split("\n\n"):
        if not block.strip():
            continue
        fields = dict(line.split(": ", 1) for line in block.splitlines())
        events.append((int(fields["id"]), fields["event"], json.loads(fields["data"])))
    return events


def make_client(tmp_path, responses):
    """One scripted gateway per session; responses is a list of lists."""
    queue = [list(r) for r in responses]

    def provider():
        return scripted_gateway(queue.pop(0))

    config = ServiceConfig(checkpoint_root=tmp_path / "ckpt", gateway_provider=provider)
    return TestClient(create_app(config))


def wait_idle(client, session_id, timeout=30.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        if client.get(f"/sessions/{session_id}/summary").json()["status"] == "idle":
            return
        time.sleep(0.05)
    raise TimeoutError("run did not finish")


SCRIPTED_FLOW = [
    action_block("PDBFileDownloader", "1LYZ", thought="fetch the structure"),
    action_block("SummarizeStructure", "f001", thought="inspect composition"),
    final_block("Downloaded and summarized 1LYZ."),
]


def test_full_flow_events_in_order(tmp_path):
    client = make_client(tmp_path, [SCRIPTED_FLOW])
    created = client.post("/sessions", json={})
    assert created.status_code == 201
    sid = created.json()["session_id"]

    posted = client.post(f"/sessions/{sid}/messages", json={"text": "download 1LYZ"})
    assert posted.status_code == 202
    wait_idle(client, sid)

    resp = client.get(f"/sessions/{sid}/events")
    events = parse_sse(resp.text)
    # the final answer is itself a trace step, then the terminal event
    assert [e[1] for e in events] == ["step", "step", "step", "final"]
    assert [e[0] for e in events] == [0, 1, 2, 3]
    assert events[0][2]["step"]["tool_name"] == "PDBFileDownloader"
    assert events[-1][2]["outcome"] == "final_answer"
    assert events[-1][2]["run_id"]

    files = client.get(f"/sessions/{sid}/files").json()["files"]
    assert any(f["kind"] == "structure" for f in files)


def test_cursor_resume_no_duplication(tmp_path):
    client = make_client(tmp_path, [SCRIPTED_FLOW])
    sid = client.post("/sessions", json={}).json()["session_id"]
    client.post(f"/sessions/{sid}/messages", json={"text": "go"})
    wait_idle(client, sid)

    first = parse_sse(client.get(f"/sessions/{sid}/events").text)
    cut = 2  # pretend the connection dropped after two events
    rest = parse_sse(client.get(f"/sessions/{sid}/events", params={"cursor": cut}).text)
    combined = first[:cut] + rest
    assert [e[0] for e in combined] == [0, 1, 2, 3]
    assert combined == first


def test_post_while_running_conflicts(tmp_path):
    slow = [
        action_block("VisualizeStructure", "f001"),
        final_block("done"),
    ]
    client = make_client(tmp_path, [SCRIPTED_FLOW[:1] + slow[1:]])
    sid = client.post("/sessions", json={}).json()["session_id"]
    client.post(f"/sessions/{sid}/messages", json={"text": "go"})
    # immediately try a second message; either it conflicts or the run is
    # already done (tiny scripted runs can finish fast)
    second = client.post(f"/sessions/{sid}/messages", json={"text": "again"})
    assert second.status_code in (202, 409)
    wait_idle(client, sid)


def test_unknown_session_404(tmp_path):
    client = make_client(tmp_path, [])
    assert client.get("/sessions/nope/events").status_code == 404
    assert client.post("/sessions/nope/messages", json={"text": "x"}).status_code == 404
    assert client.get("/sessions/nope/files").status_code == 404


def test_resume_unknown_run_id_404(tmp_path):
    client = make_client(tmp_path, [])
    resp = client.post("/sessions", json={"run_id": "does-not-exist"})
    assert resp.status_code == 404


def test_resume_carries_summary_and_files(tmp_path):
    client = make_client(tmp_path, [SCRIPTED_FLOW, []])
    sid = client.post("/sessions", json={}).json()["session_id"]
    client.post(f"/sessions/{sid}/messages", json={"text": "download 1LYZ"})
    wait_idle(client, sid)
    run_id = client.get(f"/sessions/{sid}/summary").json()["run_id"]
    assert run_id

    resumed = client.post("/sessions", json={"run_id": run_id})
    assert resumed.status_code == 201
    body = resumed.json()
    assert body["parent_run"] == run_id
    assert body["summary"]

    sid2 = body["session_id"]
    events = parse_sse(client.get(f"/sessions/{sid2}/events").text)
    assert events and events[0][1] == "summary"
    files = client.get(f"/sessions/{sid2}/files").json()["files"]
    assert files and not any(f["missing"] for f in files)


def test_file_bytes_and_media_type(tmp_path):
    flow = [
        action_block("PDBFileDownloader", "1LYZ"),
        action_block("VisualizeStructure", "f001"),
        final_block("rendered"),
    ]
    client = make_client(tmp_path, [flow])
    sid = client.post("/sessions", json={}).json()["session_id"]
    client.post(f"/sessions/{sid}/messages", json={"text": "render 1LYZ"})
    wait_idle(client, sid)
    files = client.get(f"/sessions/{sid}/files").json()["files"]
    figure = next(f for f in files if f["kind"] == "figure")
    resp = client.get(f"/sessions/{sid}/files/{figure['file_id']}")
    assert resp.status_code == 200
    assert resp.headers["content-type"].startswith("image/x-portable-pixmap")
    assert resp.content.startswith(b"P6")
    assert client.get(f"/sessions/{sid}/files/f999").status_code == 404


def test_gateway_failure_surfaces_as_final_error_event(tmp_path):
    client = make_client(tmp_path, [[]])  # exhausted script -> gateway error
    sid = client.post("/sessions", json={}).json()["session_id"]
    client.post(f"/sessions/{sid}/messages", json={"text": "go"})
    wait_idle(client, sid)
    events = parse_sse(client.get(f"/sessions/{sid}/events").text)
    assert events[-1][1] == "final"
    assert events[-1][2]["outcome"] == "unrecoverable_error"
    # the session is still usable for inspection
    assert client.get(f"/sessions/{sid}/summary").status_code == 200
