"""Grade records and cascade-aware completion scoring.

Accuracy is a human judgment the harness records, never computes.  The
cascade rule: a subtask whose dependency closure contains any incomplete
subtask counts as incomplete, because the grader penalizes every step the
agent could not perform after an earlier failure.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .tasks import TaskSpec

GRADE_SCHEMA = "mdworkbench-grade/1"
FRAMEWORKS = ("mdcrow", "single_query", "react_interpreter")
PROMPT_STYLES = ("natural", "ordered")


class GradeError(Exception):
    pass


@dataclass
class GradeRecord:
    task_id: int
    model_id: str
    framework: str
    completed: dict[str, bool]
    accuracy: bool
    prompt_style: str = "natural"
    runtime_error: bool = False
    hallucination: bool = False
    grader: str = ""
    notes: str = ""

    def __post_init__(self) -> None:
        if self.framework not in FRAMEWORKS:
            raise GradeError(f"unknown framework {self.framework!r}")
        if self.prompt_style not in PROMPT_STYLES:
            raise GradeError(f"unknown prompt style {self.prompt_style!r}")

    def to_dict(self) -> dict:
        return {
            "schema": GRADE_SCHEMA,
            "task_id": self.task_id,
            "model_id": self.model_id,
            "framework": self.framework,
            "prompt_style": self.prompt_style,
            "completed": dict(self.completed),
            "accuracy": self.accuracy,
            "runtime_error": self.runtime_error,
            "hallucination": self.hallucination,
            "grader": self.grader,
            "notes": self.notes,
        }

    @staticmethod
    def from_dict(d: dict) -> "GradeRecord":
        if d.get("schema") != GRADE_SCHEMA:
            raise GradeError(f"unknown grade schema {d.get('schema')!r}")
        return GradeRecord(
            task_id=d["task_id"],
            model_id=d["model_id"],
            framework=d["framework"],
            completed=dict(d["completed"]),
            accuracy=bool(d["accuracy"]),
            prompt_style=d.get("prompt_style", "natural"),
            runtime_error=bool(d.get("runtime_error", False)),
            hallucination=bool(d.get("hallucination", False)),
            grader=d.get("grader", ""),
            notes=d.get("notes", ""),
        )


def _check_match(grade: GradeRecord, task: TaskSpec) -> None:
    if grade.task_id != task.task_id:
        raise GradeError(f"grade is for task {grade.task_id}, not {task.task_id}")
    if set(grade.completed) != set(task.subtask_ids):
        raise GradeError(
            f"task {task.task_id}: grade covers {sorted(grade.completed)} "
            f"but task requires {sorted(task.subtask_ids)}"
        )


def apply_cascade(grade: GradeRecord, task: TaskSpec) -> dict[str, bool]:
    """Completion booleans after marking incomplete every subtask whose
    dependency closure contains an incomplete subtask."""
    _check_match(grade, task)
    out = {}
    for sid in task.subtask_ids:
        closure = task.dependency_closure(sid)
        out[sid] = grade.completed[sid] and all(grade.completed[d] for d in closure)
    return out


def completion_fraction(grade: GradeRecord, task: TaskSpec) -> float:
    cascaded = apply_cascade(grade, task)
    return sum(cascaded.values()) / len(cascaded)


def aggregate_accuracy(grades: list[GradeRecord]) -> float:
    """Percentage of grades marked accurate."""
    if not grades:
        raise GradeError("aggregate_accuracy needs at least one grade")
    return 100.0 * sum(g.accuracy for g in grades) / len(grades)


def save_grade(grade: GradeRecord, directory: str | Path) -> Path:
    """One file per record, so concurrent graders never contend."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    name = f"grade_t{grade.task_id:03d}_{grade.framework}_{grade.model_id}_{grade.prompt_style}.json"
    path = d / name.replace("/", "_")
    path.write_text(json.dumps(grade.to_dict(), indent=2, sort_keys=True) + "\n")
    return path


def load_grades(directory: str | Path) -> list[GradeRecord]:
    grades = []
    for p in sorted(Path(directory).glob("grade_*.json")):
        grades.append(GradeRecord.from_dict(json.loads(p.read_text())))
    return grades
