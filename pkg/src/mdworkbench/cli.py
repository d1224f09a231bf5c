"""Command-line entry points: run a prompt, resume a checkpointed run,
batch-evaluate task files, render reports from grades, and serve the chat
API."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .agent import run_agent
from .llm import LLMGateway, ModelConfig, ScriptedLLM
from .registry import (
    CheckpointError,
    FileRegistry,
    load_checkpoint,
    resume_registry,
    save_checkpoint,
    summarize_run,
)
from .tools import ToolContext, build_toolset


def _build_gateway(provider: str, model: str, script_file: str | None, audit: str | None) -> LLMGateway:
    scripted = None
    if provider == "mock":
        responses = []
        if script_file:
            responses = json.loads(Path(script_file).read_text())
        scripted = ScriptedLLM(responses)
    config = ModelConfig(provider=provider, model_id=model)
    return LLMGateway(config, script=scripted, audit_path=audit)


provider_option = click.option(
    "--provider", default="mock",
    type=click.Choice(["mock", "openai_style", "anthropic_style", "fireworks_style"]),
    show_default=True,
)
model_option = click.option("--model", default="mock-model", show_default=True)
script_option = click.option(
    "--script-file", default=None,
    help="JSON list of canned completions for the mock provider.",
)


@click.group()
def main() -> None:
    """Molecular dynamics workflows driven by an LLM agent."""


@main.command()
@click.argument("prompt")
@click.option("--checkpoint-root", default="checkpoints", show_default=True)
@click.option("--corpus-dir", default=None)
@click.option("--step-budget", default=40, show_default=True)
@click.option("--resume", "resume_spec", nargs=2, default=None, metavar="DIR RUN_ID",
              help="Continue from a prior checkpoint.")
@provider_option
@model_option
@script_option
def run(prompt, checkpoint_root, corpus_dir, step_budget, resume_spec, provider, model, script_file):
    """Run the agent on PROMPT and save a checkpoint; prints the run id last."""
    root = Path(checkpoint_root)
    root.mkdir(parents=True, exist_ok=True)
    gateway = _build_gateway(provider, model, script_file, None)
    context_text = None
    parent_run = None
    workdir = root / "_work"
    n = 0
    while workdir.exists():
        n += 1
        workdir = root / f"_work{n}"
    workdir.mkdir(parents=True)
    if resume_spec:
        prior_root, prior_id = resume_spec
        try:
            checkpoint = load_checkpoint(prior_root, prior_id)
        except CheckpointError as exc:
            raise click.ClickException(str(exc))
        click.echo(f"Resuming run {prior_id}. Prior summary:\n{checkpoint.summary}\n")
        registry = resume_registry(prior_root, checkpoint, workdir)
        context_text = checkpoint.summary
        parent_run = checkpoint.run_id
    else:
        registry = FileRegistry(workdir)

    ctx = ToolContext(
        registry=registry, gateway=gateway,
        corpus_dir=Path(corpus_dir) if corpus_dir else None,
    )
    toolset = build_toolset(ctx)

    def on_step(index, step):
        ctx.current_step = index + 1
        kind = step.action.tool_name or "final answer"
        click.echo(f"[step {index + 1}] {kind}: {step.observation[:200]}")

    trace = run_agent(
        prompt, toolset, gateway, context=context_text,
        step_budget=step_budget, registry=registry, step_callback=on_step,
    )
    click.echo(f"\nOutcome: {trace.outcome}")
    if trace.final_text:
        click.echo(trace.final_text)
    listing = registry.describe_all()
    if listing:
        click.echo("\nFiles:\n" + listing)
    run_id = None
    if trace.steps:
        summary, is_llm = summarize_run(trace, registry.entries, gateway)
        run_id = save_checkpoint(
            root, registry, trace, summary, summary_is_llm=is_llm, parent_run=parent_run
        )
        click.echo(f"\nrun_id: {run_id}")
    if trace.outcome == "unrecoverable_error":
        sys.exit(1)


@main.command()
@click.argument("checkpoint_root")
@click.argument("run_id")
def resume(checkpoint_root, run_id):
    """Show a stored run's summary and files without starting a new run."""
    try:
        checkpoint = load_checkpoint(checkpoint_root, run_id)
    except CheckpointError as exc:
        raise click.ClickException(str(exc))
    click.echo(f"run_id: {checkpoint.run_id}")
    if checkpoint.parent_run:
        click.echo(f"parent_run: {checkpoint.parent_run}")
    click.echo(f"summary:\n{checkpoint.summary}")
    for e in checkpoint.files:
        flag = " [missing]" if e.missing else ""
        click.echo(f"{e.file_id} [{e.kind}]{flag}: {e.description}")


@main.command("eval")
@click.argument("task_file")
@click.option("--framework", default="mdcrow", show_default=True,
              type=click.Choice(["mdcrow", "single_query", "react_interpreter"]))
@click.option("--out-dir", default="eval_out", show_default=True)
@click.option("--prompt-style", default="natural", type=click.Choice(["natural", "ordered"]),
              show_default=True)
@click.option("--step-budget", default=40, show_default=True)
@provider_option
@model_option
@script_option
def eval_cmd(task_file, framework, out_dir, prompt_style, step_budget, provider, model, script_file):
    """Run every task in TASK_FILE under one framework; failures in one
    task never stop the batch."""
    from .evalharness.runner import run_batch
    from .evalharness.tasks import TaskLoadError, load_tasks

    try:
        tasks = load_tasks(task_file)
    except TaskLoadError as exc:
        raise click.ClickException(str(exc))

    def gateway_factory(task):
        return _build_gateway(provider, model, script_file, None)

    def toolset_factory(registry):
        return build_toolset(ToolContext(registry=registry, gateway=gateway_factory(None)))

    results = run_batch(
        tasks, framework, gateway_factory, out_dir,
        build_toolset=toolset_factory if framework == "mdcrow" else None,
        prompt_style=prompt_style, step_budget=step_budget,
    )
    for r in results:
        click.echo(f"task {r.task_id}: {r.outcome} (worksheet {r.worksheet_path.name})")
    click.echo(f"index: {Path(out_dir) / 'index.json'}")


@main.command()
@click.argument("grade_dir")
@click.argument("task_file")
@click.option("--out-dir", default="report_out", show_default=True)
def report(grade_dir, task_file, out_dir):
    """Render CSV tables and figure panels from recorded grades."""
    from .evalharness.grading import load_grades
    from .evalharness.reports import render_reports
    from .evalharness.tasks import load_tasks

    grades = load_grades(grade_dir)
    if not grades:
        raise click.ClickException(f"no grade records found in {grade_dir}")
    tasks = load_tasks(task_file)
    for path in render_reports(grades, tasks, out_dir):
        click.echo(str(path))


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8765, show_default=True)
@click.option("--checkpoint-root", default="checkpoints", show_default=True)
@click.option("--corpus-dir", default=None)
@click.option("--step-budget", default=40, show_default=True)
@provider_option
@model_option
@script_option
def serve(host, port, checkpoint_root, corpus_dir, step_budget, provider, model, script_file):
    """Serve the chat API (sessions, step streaming, file access)."""
    import uvicorn

    from .service import ServiceConfig, create_app

    config = ServiceConfig(
        checkpoint_root=Path(checkpoint_root),
        gateway_provider=lambda: _build_gateway(provider, model, script_file, None),
        corpus_dir=Path(corpus_dir) if corpus_dir else None,
        step_budget=step_budget,
    )
    uvicorn.run(create_app(config), host=host, port=port)


if __name__ == "__main__":
    main()
