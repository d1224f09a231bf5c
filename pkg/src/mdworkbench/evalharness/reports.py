"""Report generation over recorded grades: per-group CSV summaries plus
rendered figure panels (accuracy bars and robustness CV bars)."""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from ..imaging import figure_to_ppm
from .grading import GradeRecord, aggregate_accuracy, completion_fraction
from .stats import robustness_cv
from .tasks import TaskSpec


def _group(grades: list[GradeRecord]):
    groups: dict[tuple[str, str], list[GradeRecord]] = defaultdict(list)
    for g in grades:
        groups[(g.model_id, g.framework)].append(g)
    return groups


def accuracy_table(grades: list[GradeRecord]) -> list[dict]:
    rows = []
    for (model, framework), gs in sorted(_group(grades).items()):
        rows.append(
            {
                "model_id": model,
                "framework": framework,
                "n_tasks": len(gs),
                "accuracy_pct": aggregate_accuracy(gs),
                "hallucination_pct": 100.0 * sum(g.hallucination for g in gs) / len(gs),
                "runtime_error_pct": 100.0 * sum(g.runtime_error for g in gs) / len(gs),
            }
        )
    return rows


def completion_table(grades: list[GradeRecord], tasks: list[TaskSpec]) -> list[dict]:
    by_id = {t.task_id: t for t in tasks}
    rows = []
    for g in sorted(grades, key=lambda g: (g.model_id, g.framework, g.task_id)):
        task = by_id[g.task_id]
        rows.append(
            {
                "model_id": g.model_id,
                "framework": g.framework,
                "prompt_style": g.prompt_style,
                "task_id": g.task_id,
                "complexity": task.complexity,
                "completion_pct": 100.0 * completion_fraction(g, task),
                "accuracy": int(g.accuracy),
            }
        )
    return rows


def robustness_table(grades: list[GradeRecord], tasks: list[TaskSpec]) -> list[dict]:
    by_id = {t.task_id: t for t in tasks}
    groups: dict[tuple[str, str], list[GradeRecord]] = defaultdict(list)
    for g in grades:
        groups[(g.model_id, g.prompt_style)].append(g)
    rows = []
    for (model, style), gs in sorted(groups.items()):
        completions = [100.0 * completion_fraction(g, by_id[g.task_id]) for g in gs]
        rep = robustness_cv(completions)
        rows.append(
            {
                "model_id": model,
                "prompt_style": style,
                "n_tasks": len(gs),
                "mean_completion_pct": rep.mean,
                "sd": rep.sd,
                "cv": rep.cv if rep.defined else "undefined",
            }
        )
    return rows


def write_csv(rows: list[dict], path: str | Path) -> Path:
    p = Path(path)
    if not rows:
        p.write_text("")
        return p
    cols = list(rows[0].keys())
    lines = [",".join(cols)]
    for r in rows:
        lines.append(",".join(_fmt(r[c]) for c in cols))
    p.write_text("\n".join(lines) + "\n")
    return p


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _bar_panel(labels: list[str], values: list[float], title: str, ylabel: str, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(max(4, 0.9 * len(labels)), 3.5))
    ax.bar(range(len(values)), values, color="#4878a8")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=7)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    fig.tight_layout()
    return figure_to_ppm(fig, path)


def render_reports(
    grades: list[GradeRecord], tasks: list[TaskSpec], out_dir: str | Path
) -> list[Path]:
    """CSV tables plus two PPM panels: accuracy per (model, framework) and
    CV per (model, prompt style)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [
        write_csv(accuracy_table(grades), out / "accuracy.csv"),
        write_csv(completion_table(grades, tasks), out / "completions.csv"),
        write_csv(robustness_table(grades, tasks), out / "robustness.csv"),
    ]
    acc = accuracy_table(grades)
    written.append(
        _bar_panel(
            [f"{r['model_id']}\n{r['framework']}" for r in acc],
            [r["accuracy_pct"] for r in acc],
            "Accurate solutions",
            "% of tasks",
            out / "accuracy_panel.ppm",
        )
    )
    rob = robustness_table(grades, tasks)
    defined = [r for r in rob if r["cv"] != "undefined"]
    if defined:
        written.append(
            _bar_panel(
                [f"{r['model_id']}\n{r['prompt_style']}" for r in defined],
                [r["cv"] for r in defined],
                "Robustness (lower is more consistent)",
                "CV of completion %",
                out / "robustness_panel.ppm",
            )
        )
    return written
