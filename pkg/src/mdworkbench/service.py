"""HTTP chat service: sessions, message runs, and server-sent step events.

Each session serializes its runs (posting a message while one is running is
a conflict); step events are produced by the run loop and fan out to any
number of stream subscribers, with cursor-based resume."""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import Response, StreamingResponse
from pydantic import BaseModel

from .agent import TraceStep, run_agent
from .llm import LLMGateway
from .registry import (
    CheckpointError,
    FileRegistry,
    load_checkpoint,
    new_run_id,
    resume_registry,
    save_checkpoint,
    summarize_run,
)
from .tools import ToolContext, build_toolset


@dataclass
class ServiceConfig:
    checkpoint_root: Path
    gateway_provider: Callable[[], LLMGateway]
    corpus_dir: Path | None = None
    step_budget: int = 40


@dataclass
class Session:
    session_id: str
    workdir: Path
    registry: FileRegistry
    context: ToolContext
    status: str = "idle"  # idle | running
    events: list[dict] = field(default_factory=list)
    summary: str = ""
    run_id: str | None = None
    parent_run: str | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)
    changed: threading.Condition = field(default_factory=threading.Condition)

    def emit(self, event: dict) -> None:
        with self.changed:
            self.events.append(event)
            self.changed.notify_all()


class MessageBody(BaseModel):
    text: str


class CreateBody(BaseModel):
    checkpoint_root: str | None = None
    run_id: str | None = None


def create_app(config: ServiceConfig) -> FastAPI:
    app = FastAPI(title="mdworkbench chat service")
    sessions: dict[str, Session] = {}
    app.state.sessions = sessions
    config.checkpoint_root.mkdir(parents=True, exist_ok=True)

    def _get(session_id: str) -> Session:
        if session_id not in sessions:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        return sessions[session_id]

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateBody | None = None):
        session_id = new_run_id()
        workdir = config.checkpoint_root / f"session_{session_id}"
        workdir.mkdir(parents=True)
        summary = ""
        parent_run = None
        if body is not None and body.run_id:
            root = Path(body.checkpoint_root) if body.checkpoint_root else config.checkpoint_root
            try:
                checkpoint = load_checkpoint(root, body.run_id)
            except CheckpointError as exc:
                raise HTTPException(status_code=404, detail=str(exc))
            registry = resume_registry(root, checkpoint, workdir)
            summary = checkpoint.summary
            parent_run = checkpoint.run_id
        else:
            registry = FileRegistry(workdir)
        ctx = ToolContext(
            registry=registry,
            gateway=config.gateway_provider(),
            corpus_dir=config.corpus_dir,
        )
        session = Session(
            session_id=session_id,
            workdir=workdir,
            registry=registry,
            context=ctx,
            summary=summary,
            parent_run=parent_run,
        )
        if summary:
            session.emit({"type": "summary", "text": summary, "parent_run": parent_run})
        sessions[session_id] = session
        return {"session_id": session_id, "summary": summary, "parent_run": parent_run}

    @app.post("/sessions/{session_id}/messages", status_code=202)
    def post_message(session_id: str, body: MessageBody):
        session = _get(session_id)
        with session.lock:
            if session.status == "running":
                raise HTTPException(status_code=409, detail="a run is already in progress")
            session.status = "running"
        thread = threading.Thread(
            target=_run, args=(session, body.text, config), daemon=True
        )
        thread.start()
        return {"status": "running", "cursor": len(session.events)}

    @app.get("/sessions/{session_id}/events")
    def stream_events(session_id: str, request: Request, cursor: int = 0):
        session = _get(session_id)
        return StreamingResponse(
            _event_stream(session, cursor), media_type="text/event-stream"
        )

    @app.get("/sessions/{session_id}/files")
    def list_files(session_id: str):
        session = _get(session_id)
        return {
            "files": [
                {
                    "file_id": e.file_id,
                    "path": e.path,
                    "description": e.description,
                    "kind": e.kind,
                    "missing": e.missing,
                }
                for e in session.registry.entries
            ]
        }

    @app.get("/sessions/{session_id}/files/{file_id}")
    def fetch_file(session_id: str, file_id: str):
        session = _get(session_id)
        try:
            path = session.registry.resolve(file_id)
        except Exception as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        media = "image/x-portable-pixmap" if path.suffix == ".ppm" else "application/octet-stream"
        return Response(content=path.read_bytes(), media_type=media)

    @app.get("/sessions/{session_id}/summary")
    def get_summary(session_id: str):
        session = _get(session_id)
        return {
            "summary": session.summary,
            "run_id": session.run_id,
            "status": session.status,
        }

    return app


def _run(session: Session, text: str, config: ServiceConfig) -> None:
    toolset = build_toolset(session.context)

    def on_step(index: int, step: TraceStep) -> None:
        session.context.current_step = index + 1
        session.emit({"type": "step", "index": index, "step": step.to_dict()})

    try:
        trace = run_agent(
            text,
            toolset,
            session.context.gateway,
            context=session.summary or None,
            step_budget=config.step_budget,
            registry=session.registry,
            step_callback=on_step,
        )
        run_id = None
        if trace.steps:
            summary, is_llm = summarize_run(trace, session.registry.entries, session.context.gateway)
            run_id = save_checkpoint(
                config.checkpoint_root,
                session.registry,
                trace,
                summary,
                summary_is_llm=is_llm,
                parent_run=session.parent_run,
            )
            session.summary = summary
            session.run_id = run_id
        session.emit(
            {
                "type": "final",
                "outcome": trace.outcome,
                "text": trace.final_text,
                "run_id": run_id,
            }
        )
    except Exception as exc:  # surfaced to subscribers, session stays usable
        session.emit({"type": "final", "outcome": "unrecoverable_error", "text": str(exc), "run_id": None})
    finally:
        with session.lock:
            session.status = "idle"


def _event_stream(session: Session, cursor: int) -> Iterator[str]:
    """Replay events from the cursor, then follow live events until the
    next terminal event."""
    i = max(0, cursor)
    while True:
        with session.changed:
            while i >= len(session.events):
                if session.status != "running":
                    # Nothing more will arrive; close the stream.
                    return
                session.changed.wait(timeout=0.5)
            event = session.events[i]
        payload = json.dumps(event, sort_keys=True)
        yield f"id: {i}\nevent: {event['type']}\ndata: {payload}\n\n"
        i += 1
        if event["type"] == "final":
            return
