"""Execute one task under a chosen framework, persist a checkpoint, and
emit a grading worksheet for the human grader."""

from __future__ import annotations

import json
import traceback
from dataclasses import dataclass
from pathlib import Path

from ..agent import AgentTrace, run_agent
from ..llm import LLMGateway
from ..registry import FileRegistry, save_checkpoint, summarize_run
from ..sandbox import SandboxConfig
from .baselines import baseline_react_interpreter, baseline_single_query
from .tasks import TaskSpec

WORKSHEET_HEADER = (
    "# Grading worksheet\n"
    "# Mark each subtask [x] complete or [ ] incomplete, then fill the\n"
    "# boolean fields. A subtask blocked by an earlier failure stays\n"
    "# incomplete; scoring applies the dependency cascade automatically.\n"
)


@dataclass
class RunResult:
    task_id: int
    framework: str
    outcome: str
    runtime_error: bool
    run_id: str | None
    transcript_path: Path
    worksheet_path: Path
    final_text: str


def write_worksheet(
    task: TaskSpec, framework: str, out_path: Path, runtime_error: bool = False
) -> Path:
    lines = [WORKSHEET_HEADER]
    lines.append(f"task_id: {task.task_id}")
    lines.append(f"framework: {framework}")
    lines.append(f"prompt: {task.prompt_natural}")
    lines.append("")
    for s in task.subtasks:
        deps = f" (after {', '.join(s.depends_on)})" if s.depends_on else ""
        lines.append(f"[ ] {s.subtask_id}: {s.description}{deps}")
    lines.append("")
    lines.append("accuracy: ")
    lines.append(f"runtime_error: {'true' if runtime_error else ''}")
    lines.append("hallucination: ")
    lines.append("grader: ")
    lines.append("notes: ")
    out_path.write_text("\n".join(lines) + "\n")
    return out_path


def run_task(
    task: TaskSpec,
    framework: str,
    gateway: LLMGateway,
    out_dir: str | Path,
    build_toolset=None,
    prompt_style: str = "natural",
    checkpoint_root: str | Path | None = None,
    step_budget: int = 40,
) -> RunResult:
    """A framework crash still leaves a transcript and a worksheet with
    runtime_error prefilled true."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stamp = f"task{task.task_id:03d}_{framework}_{prompt_style}"
    transcript_path = out / f"{stamp}_transcript.json"
    worksheet_path = out / f"{stamp}_worksheet.txt"
    prompt = (
        task.prompt_ordered
        if prompt_style == "ordered" and task.prompt_ordered
        else task.prompt_natural
    )

    trace: AgentTrace | None = None
    runtime_error = False
    run_id = None
    transcript: dict = {"task_id": task.task_id, "framework": framework, "prompt": prompt}
    try:
        if framework == "mdcrow":
            workdir = out / f"{stamp}_files"
            workdir.mkdir(exist_ok=True)
            registry = FileRegistry(workdir)
            toolset = build_toolset(registry) if build_toolset else []
            trace = run_agent(prompt, toolset, gateway, registry=registry, step_budget=step_budget)
            if checkpoint_root is not None and trace.steps:
                summary, is_llm = summarize_run(trace, registry.entries, None)
                run_id = save_checkpoint(
                    checkpoint_root, registry, trace, summary, summary_is_llm=is_llm
                )
            transcript["trace"] = trace.to_dict()
        elif framework == "single_query":
            workdir = out / f"{stamp}_files"
            workdir.mkdir(exist_ok=True)
            registry = FileRegistry(workdir)
            result = baseline_single_query(task, gateway, registry, prompt_style)
            transcript["completions"] = [result.completion]
            transcript["script"] = str(registry.root / result.script_entry.path)
        elif framework == "react_interpreter":
            sandbox = SandboxConfig(workdir=out / f"{stamp}_sandbox")
            trace = baseline_react_interpreter(task, gateway, sandbox, prompt_style, step_budget)
            transcript["trace"] = trace.to_dict()
        else:
            raise ValueError(f"unknown framework {framework!r}")
        if trace is not None and trace.outcome == "unrecoverable_error":
            runtime_error = True
    except Exception:
        runtime_error = True
        transcript["crash"] = traceback.format_exc()

    transcript_path.write_text(json.dumps(transcript, indent=2, sort_keys=True) + "\n")
    write_worksheet(task, framework, worksheet_path, runtime_error=runtime_error)
    return RunResult(
        task_id=task.task_id,
        framework=framework,
        outcome=trace.outcome if trace is not None else ("crashed" if runtime_error else "completed"),
        runtime_error=runtime_error,
        run_id=run_id,
        transcript_path=transcript_path,
        worksheet_path=worksheet_path,
        final_text=trace.final_text if trace is not None else transcript.get("completions", [""])[0],
    )


def run_batch(
    tasks: list[TaskSpec],
    framework: str,
    gateway_factory,
    out_dir: str | Path,
    **kwargs,
) -> list[RunResult]:
    """One transcript per task; a failure in one task never stops the rest.
    gateway_factory is called per task so scripted mocks stay independent."""
    results = []
    for task in tasks:
        results.append(run_task(task, framework, gateway_factory(task), out_dir, **kwargs))
    index = Path(out_dir) / "index.json"
    index.write_text(
        json.dumps(
            [
                {
                    "task_id": r.task_id,
                    "framework": r.framework,
                    "outcome": r.outcome,
                    "runtime_error": r.runtime_error,
                    "transcript": r.transcript_path.name,
                    "worksheet": r.worksheet_path.name,
                }
                for r in results
            ],
            indent=2,
        )
        + "\n"
    )
    return results
