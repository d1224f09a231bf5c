"""Per-run file registry and the checkpoint/resume protocol.

Every artifact a tool produces gets a short id and a provenance line.
A finished (or paused) run persists to ``<root>/<run_id>/`` with a
versioned manifest, the full trace, and copies of every registered file,
so a later session can resume with the summarized context and the same
file corpus.
"""

from __future__ import annotations

import json
import secrets
import shutil
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .agent import AgentTrace
from .llm import GatewayError, LLMGateway, ChatMessage

MANIFEST_SCHEMA = "mdworkbench-checkpoint/1"
FILE_KINDS = ("structure", "trajectory", "state_log", "figure", "script", "other")

SUMMARY_PROMPT = (
    "Summarize this agent run in at most 500 words for resuming later. Cover: "
    "the user's goal, the tools used, the files produced (cite their file ids), "
    "and any outstanding issues.\n\nUser goal: {goal}\n\nSteps:\n{steps}\n\nFiles:\n{files}"
)


class RegistryError(Exception):
    pass


class CheckpointError(Exception):
    pass


@dataclass
class FileEntry:
    file_id: str
    path: str  # relative to the registry/checkpoint root
    description: str
    created_at_step: int
    kind: str
    missing: bool = False

    def to_dict(self) -> dict:
        return {
            "file_id": self.file_id,
            "path": self.path,
            "description": self.description,
            "created_at_step": self.created_at_step,
            "kind": self.kind,
            "missing": self.missing,
        }

    @staticmethod
    def from_dict(d: dict) -> "FileEntry":
        return FileEntry(**d)


def new_run_id(rng: Callable[[int], str] = secrets.token_urlsafe) -> str:
    # 16 URL-safe chars ~ 95 random bits; token_urlsafe(12) yields 16 chars.
    return rng(12)


class FileRegistry:
    """Owned by exactly one run; maps file ids to paths under `root`."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.entries: list[FileEntry] = []
        self._counter = 0

    def register_file(
        self, path: str | Path, description: str, kind: str = "other", step: int = 0
    ) -> FileEntry:
        if kind not in FILE_KINDS:
            raise RegistryError(f"unknown file kind {kind!r}")
        p = Path(path)
        if not p.is_absolute():
            p = self.root / p
        if not p.exists():
            raise RegistryError(f"cannot register missing path: {p}")
        try:
            rel = str(p.relative_to(self.root))
        except ValueError:
            # Outside the root: copy it in so checkpoints stay relocatable.
            dest = self.root / p.name
            if dest.resolve() != p.resolve():
                shutil.copy2(p, dest)
            rel = p.name
        self._counter += 1
        entry = FileEntry(
            file_id=f"f{self._counter:03d}",
            path=rel,
            description=description,
            created_at_step=step,
            kind=kind,
        )
        self.entries.append(entry)
        return entry

    def resolve(self, file_id: str) -> Path:
        for e in self.entries:
            if e.file_id == file_id:
                if e.missing:
                    raise RegistryError(f"file {file_id} payload is missing")
                return self.root / e.path
        raise RegistryError(f"unknown file id {file_id!r}")

    def lookup(self, token: str) -> Path:
        """Resolve a tool-supplied token: file id first, then a bare path
        under the registry root."""
        try:
            return self.resolve(token)
        except RegistryError:
            p = self.root / token
            if p.exists():
                return p
            raise

    def describe_all(self) -> str:
        lines = [
            f"{e.file_id} [{e.kind}]{' [missing]' if e.missing else ''}: "
            f"{e.description} ({e.path})"
            for e in self.entries
        ]
        return "\n".join(lines)


@dataclass
class RunCheckpoint:
    run_id: str
    summary: str
    files: list[FileEntry]
    trace: AgentTrace
    parent_run: str | None = None
    created: float = 0.0
    summary_is_llm: bool = True

    def manifest_dict(self) -> dict:
        return {
            "schema": MANIFEST_SCHEMA,
            "run_id": self.run_id,
            "summary": self.summary,
            "summary_is_llm": self.summary_is_llm,
            "summary_prompt_template": SUMMARY_PROMPT,
            "parent_run": self.parent_run,
            "created": self.created,
            "files": [f.to_dict() for f in self.files],
            "trace_outcome": self.trace.outcome,
        }


def mechanical_digest(trace: AgentTrace, files: list[FileEntry]) -> str:
    """Fallback summary when the gateway is unavailable: tool names plus
    the file listing."""
    tools = []
    for s in trace.steps:
        if s.action.kind == "tool_call" and s.action.tool_name not in tools:
            tools.append(s.action.tool_name)
    lines = ["[mechanical digest; no LLM summary available]"]
    lines.append(f"Goal: {trace.user_input}")
    lines.append("Tools used: " + (", ".join(t for t in tools if t) or "none"))
    for f in files:
        lines.append(f"File {f.file_id} [{f.kind}]: {f.description}")
    lines.append(f"Outcome: {trace.outcome}")
    return "\n".join(lines)


def summarize_run(
    trace: AgentTrace, files: list[FileEntry], gateway: LLMGateway | None
) -> tuple[str, bool]:
    """Return (summary, is_llm_generated)."""
    if not trace.steps:
        raise ValueError("cannot summarize an empty trace")
    if gateway is None:
        return mechanical_digest(trace, files), False
    steps_txt = "\n".join(
        f"{i}. {s.action.kind} {s.action.tool_name or ''} -> {s.observation[:200]}"
        for i, s in enumerate(trace.steps)
    )
    files_txt = "\n".join(f"{f.file_id}: {f.description}" for f in files) or "none"
    prompt = SUMMARY_PROMPT.format(goal=trace.user_input, steps=steps_txt, files=files_txt)
    try:
        text = gateway.complete_chat(
            [ChatMessage("system", "You write concise scientific run summaries."),
             ChatMessage("user", prompt)]
        )
        return text, True
    except GatewayError:
        return mechanical_digest(trace, files), False


def save_checkpoint(
    checkpoint_root: str | Path,
    registry: FileRegistry,
    trace: AgentTrace,
    summary: str,
    summary_is_llm: bool = True,
    parent_run: str | None = None,
    run_id: str | None = None,
    clock: Callable[[], float] = time.time,
) -> str:
    """Persist a run.  Directory creation is the atomicity point: a second
    save with the same run_id fails rather than interleaving."""
    root = Path(checkpoint_root)
    root.mkdir(parents=True, exist_ok=True)
    rid = run_id or new_run_id()
    folder = root / rid
    try:
        folder.mkdir(parents=False, exist_ok=False)
    except FileExistsError:
        raise CheckpointError(f"run id collision: {rid}") from None
    except OSError as exc:
        raise CheckpointError(f"cannot write checkpoint root: {exc}") from exc

    files_dir = folder / "files"
    files_dir.mkdir()
    stored: list[FileEntry] = []
    for e in registry.entries:
        dest_rel = f"files/{e.file_id}__{Path(e.path).name}"
        src = registry.root / e.path
        missing = e.missing or not src.exists()
        if not missing:
            shutil.copy2(src, folder / dest_rel)
        stored.append(
            FileEntry(
                file_id=e.file_id,
                path=dest_rel,
                description=e.description,
                created_at_step=e.created_at_step,
                kind=e.kind,
                missing=missing,
            )
        )

    checkpoint = RunCheckpoint(
        run_id=rid,
        summary=summary,
        files=stored,
        trace=trace,
        parent_run=parent_run,
        created=clock(),
        summary_is_llm=summary_is_llm,
    )
    (folder / "trace").write_text(json.dumps(trace.to_dict(), indent=2, sort_keys=True) + "\n")
    (folder / "manifest").write_text(
        json.dumps(checkpoint.manifest_dict(), indent=2, sort_keys=True) + "\n"
    )
    return rid


def load_checkpoint(checkpoint_root: str | Path, run_id: str) -> RunCheckpoint:
    """Load a checkpoint, verifying each payload's presence; missing
    payloads are flagged on their entries, the rest stay usable."""
    folder = Path(checkpoint_root) / run_id
    if not folder.is_dir():
        raise CheckpointError(f"unknown run id {run_id!r} under {checkpoint_root}")
    try:
        manifest = json.loads((folder / "manifest").read_text())
        trace = AgentTrace.from_dict(json.loads((folder / "trace").read_text()))
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise CheckpointError(f"corrupt checkpoint {run_id}: {exc}") from exc
    if manifest.get("schema") != MANIFEST_SCHEMA:
        raise CheckpointError(f"unsupported manifest schema: {manifest.get('schema')!r}")
    files = [FileEntry.from_dict(d) for d in manifest["files"]]
    for e in files:
        if not (folder / e.path).exists():
            e.missing = True
    return RunCheckpoint(
        run_id=manifest["run_id"],
        summary=manifest["summary"],
        files=files,
        trace=trace,
        parent_run=manifest.get("parent_run"),
        created=manifest.get("created", 0.0),
        summary_is_llm=manifest.get("summary_is_llm", True),
    )


def resume_registry(
    checkpoint_root: str | Path, checkpoint: RunCheckpoint, workdir: str | Path
) -> FileRegistry:
    """Build a fresh registry for a resumed run, pre-populated with the
    prior entries (payloads copied from the checkpoint folder)."""
    folder = Path(checkpoint_root) / checkpoint.run_id
    reg = FileRegistry(workdir)
    for e in checkpoint.files:
        src = folder / e.path
        rel = Path(e.path).name
        prefix = f"{e.file_id}__"
        if rel.startswith(prefix):
            rel = rel[len(prefix):]
        missing = e.missing or not src.exists()
        if not missing:
            shutil.copy2(src, reg.root / rel)
        reg.entries.append(
            FileEntry(
                file_id=e.file_id,
                path=rel,
                description=e.description,
                created_at_step=e.created_at_step,
                kind=e.kind,
                missing=missing,
            )
        )
    # Continue id numbering after the inherited entries.
    reg._counter = len(reg.entries)
    return reg
