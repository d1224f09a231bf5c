"""Task specifications: a prompt plus the minimum required subtasks as a
dependency DAG.  Two task sets ship with the package: the 25-task benchmark
and the 10-task complexity ladder with natural and ordered prompt styles."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

TASK_SCHEMA = "mdworkbench-tasks/1"


class TaskLoadError(Exception):
    pass


@dataclass(frozen=True)
class Subtask:
    subtask_id: str
    description: str
    depends_on: tuple[str, ...] = ()


@dataclass
class TaskSpec:
    task_id: int
    prompt_natural: str
    subtasks: list[Subtask]
    prompt_ordered: str | None = None
    notes: str = ""

    def __post_init__(self) -> None:
        ids = [s.subtask_id for s in self.subtasks]
        if len(set(ids)) != len(ids):
            raise TaskLoadError(f"task {self.task_id}: duplicate subtask ids")
        if not 1 <= len(ids) <= 10:
            raise TaskLoadError(
                f"task {self.task_id}: complexity {len(ids)} outside the 1..10 range"
            )
        known = set(ids)
        for s in self.subtasks:
            missing = set(s.depends_on) - known
            if missing:
                raise TaskLoadError(
                    f"task {self.task_id}: {s.subtask_id} depends on unknown {sorted(missing)}"
                )
        self._check_acyclic()

    @property
    def complexity(self) -> int:
        return len(self.subtasks)

    @property
    def subtask_ids(self) -> list[str]:
        return [s.subtask_id for s in self.subtasks]

    def _check_acyclic(self) -> None:
        deps = {s.subtask_id: set(s.depends_on) for s in self.subtasks}
        resolved: set[str] = set()
        while deps:
            ready = [k for k, v in deps.items() if v <= resolved]
            if not ready:
                raise TaskLoadError(f"task {self.task_id}: dependency cycle among {sorted(deps)}")
            for k in ready:
                resolved.add(k)
                del deps[k]

    def dependency_closure(self, subtask_id: str) -> set[str]:
        """Every subtask reachable by following depends_on edges."""
        by_id = {s.subtask_id: s for s in self.subtasks}
        seen: set[str] = set()
        stack = list(by_id[subtask_id].depends_on)
        while stack:
            cur = stack.pop()
            if cur in seen:
                continue
            seen.add(cur)
            stack.extend(by_id[cur].depends_on)
        return seen


def _data_dir() -> Path:
    return Path(__file__).resolve().parent.parent / "data"


def default_task_file() -> Path:
    return _data_dir() / "tasks_25.json"


def default_ladder_file() -> Path:
    return _data_dir() / "tasks_ladder.json"


def load_tasks(path: str | Path) -> list[TaskSpec]:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise TaskLoadError(f"cannot read task file {path}: {exc}") from exc
    if doc.get("schema") != TASK_SCHEMA:
        raise TaskLoadError(f"unknown task schema {doc.get('schema')!r}")
    tasks = []
    seen_ids: set[int] = set()
    for raw in doc.get("tasks", []):
        tid = raw["task_id"]
        if tid in seen_ids:
            raise TaskLoadError(f"duplicate task id {tid}")
        seen_ids.add(tid)
        subtasks = [
            Subtask(s["id"], s["description"], tuple(s.get("depends_on", ())))
            for s in raw["subtasks"]
        ]
        tasks.append(
            TaskSpec(
                task_id=tid,
                prompt_natural=raw["prompt_natural"],
                prompt_ordered=raw.get("prompt_ordered"),
                subtasks=subtasks,
                notes=raw.get("notes", ""),
            )
        )
    if not tasks:
        raise TaskLoadError(f"task file {path} contains no tasks")
    return tasks
