import json

import pytest

from mdworkbench.agent import AgentAction, AgentTrace, TraceStep
from mdworkbench.llm import scripted_gateway
from mdworkbench.registry import (
    CheckpointError,
    FileRegistry,
    RegistryError,
    load_checkpoint,
    mechanical_digest,
    new_run_id,
    resume_registry,
    save_checkpoint,
    summarize_run,
)


def make_trace() -> AgentTrace:
    steps = [
        TraceStep(
            action=AgentAction(thought="fetch", kind="tool_call", tool_name="PDBFileDownloader", tool_input="1LYZ"),
            observation="Downloaded 1LYZ as f001",
            wall_time_s=0.1,
            error=False,
        ),
        TraceStep(
            action=AgentAction(thought="done", kind="final_answer", answer="fetched"),
            observation="",
            wall_time_s=0.05,
            error=False,
        ),
    ]
    return AgentTrace(steps=steps, outcome="final_answer", final_text="fetched", user_input="get 1LYZ")


@pytest.fixture
def registry(tmp_path):
    work = tmp_path / "work"
    work.mkdir()
    return FileRegistry(work)


def test_run_ids_are_16_urlsafe_chars():
    ids = {new_run_id() for _ in range(50)}
    assert len(ids) == 50
    for rid in ids:
        assert len(rid) == 16
        assert all(c.isalnum() or c in "-_" for c in rid)


def test_register_and_resolve(registry):
    p = registry.root / "out.txt"
    p.write_text("data")
    entry = registry.register_file(p, "an output", kind="other")
    assert entry.file_id == "f001"
    assert registry.resolve("f001") == p
    assert registry.lookup("out.txt") == p


def test_register_missing_path_fails(registry):
    with pytest.raises(RegistryError):
        registry.register_file(registry.root / "ghost.txt", "nope")


def test_register_unknown_kind_fails(registry):
    p = registry.root / "x.txt"
    p.write_text("x")
    with pytest.raises(RegistryError):
        registry.register_file(p, "x", kind="blob")


def test_external_file_copied_into_root(registry, tmp_path):
    outside = tmp_path / "elsewhere.txt"
    outside.write_text("outside")
    entry = registry.register_file(outside, "external input", kind="structure")
    assert (registry.root / "elsewhere.txt").exists()
    assert entry.path == "elsewhere.txt"


def test_checkpoint_round_trip(tmp_path, registry):
    p = registry.root / "result.csv"
    p.write_text("x,y\n1,2\n")
    registry.register_file(p, "a series", kind="other")
    trace = make_trace()
    rid = save_checkpoint(tmp_path / "ckpt", registry, trace, "did a thing", summary_is_llm=False)
    cp = load_checkpoint(tmp_path / "ckpt", rid)
    assert cp.summary == "did a thing"
    assert cp.run_id == rid
    assert [e.description for e in cp.files] == ["a series"]
    assert cp.trace.outcome == trace.outcome
    assert cp.trace.to_dict() == trace.to_dict()


def test_missing_payload_flags_only_that_entry(tmp_path, registry):
    for name in ("a.txt", "b.txt"):
        p = registry.root / name
        p.write_text(name)
        registry.register_file(p, name, kind="other")
    rid = save_checkpoint(tmp_path / "ckpt", registry, make_trace(), "s", summary_is_llm=False)
    folder = tmp_path / "ckpt" / rid
    victim = next(folder.glob("files/*a.txt"))
    victim.unlink()
    cp = load_checkpoint(tmp_path / "ckpt", rid)
    flags = {e.description: e.missing for e in cp.files}
    assert flags == {"a.txt": True, "b.txt": False}


def test_duplicate_run_id_save_refused(tmp_path, registry):
    rid = save_checkpoint(tmp_path / "c", registry, make_trace(), "s", run_id="fixedrunid000001")
    with pytest.raises(CheckpointError):
        save_checkpoint(tmp_path / "c", registry, make_trace(), "s", run_id="fixedrunid000001")
    assert rid == "fixedrunid000001"


def test_load_unknown_run_id(tmp_path):
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path, "nosuchrun1234567")


def test_corrupt_manifest_rejected(tmp_path, registry):
    rid = save_checkpoint(tmp_path / "c", registry, make_trace(), "s")
    (tmp_path / "c" / rid / "manifest").write_text("{not json")
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "c", rid)


def test_resume_continues_file_counter(tmp_path, registry):
    p = registry.root / "first.txt"
    p.write_text("1")
    registry.register_file(p, "first", kind="other")
    rid = save_checkpoint(tmp_path / "c", registry, make_trace(), "s")
    cp = load_checkpoint(tmp_path / "c", rid)
    work2 = tmp_path / "work2"
    work2.mkdir()
    reg2 = resume_registry(tmp_path / "c", cp, work2)
    assert (work2 / "first.txt").exists()
    q = work2 / "second.txt"
    q.write_text("2")
    entry = reg2.register_file(q, "second", kind="other")
    assert entry.file_id == "f002"


def test_summarize_run_llm_and_fallback(registry):
    trace = make_trace()
    gw = scripted_gateway(["A run that fetched 1LYZ."])
    text, is_llm = summarize_run(trace, registry.entries, gw)
    assert is_llm and "1LYZ" in text
    mech, is_llm2 = summarize_run(trace, registry.entries, None)
    assert not is_llm2
    assert mech == mechanical_digest(trace, registry.entries)


def test_manifest_is_deterministic_json(tmp_path, registry):
    clock = lambda: 1700000000.0
    kw = dict(summary_is_llm=False, clock=clock)
    rid1 = save_checkpoint(tmp_path / "c1", registry, make_trace(), "s", run_id="deterministic001", **kw)
    rid2 = save_checkpoint(tmp_path / "c2", registry, make_trace(), "s", run_id="deterministic001", **kw)
    m1 = (tmp_path / "c1" / rid1 / "manifest").read_bytes()
    m2 = (tmp_path / "c2" / rid2 / "manifest").read_bytes()
    assert m1 == m2
    assert json.loads(m1)["schema"] == "mdworkbench-checkpoint/1"
