"""Benchmarking harness: task specifications with subtask dependency
graphs, framework runners, cascade-aware grading, and summary statistics."""

from .grading import GradeRecord, aggregate_accuracy, apply_cascade, completion_fraction
from .stats import RobustnessReport, robustness_cv, spearman_complexity_correlation, welch_t_test
from .tasks import TaskSpec, Subtask, default_task_file, default_ladder_file, load_tasks

__all__ = [
    "GradeRecord",
    "aggregate_accuracy",
    "apply_cascade",
    "completion_fraction",
    "RobustnessReport",
    "robustness_cv",
    "spearman_complexity_correlation",
    "welch_t_test",
    "TaskSpec",
    "Subtask",
    "default_task_file",
    "default_ladder_file",
    "load_tasks",
]
