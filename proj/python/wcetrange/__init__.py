"""Python access to the wcetrange scheduler, border files and pipeline."""

from ._core import (
    Border,
    FileError,
    FormatError,
    PipelineError,
    TaskSet,
    TaskSetError,
    load_border,
    load_task_set,
    mann_whitney_u,
    miss_probability,
    parse_task_set,
    run_full,
    simulate,
)

__all__ = [
    "Border",
    "FileError",
    "FormatError",
    "PipelineError",
    "TaskSet",
    "TaskSetError",
    "load_border",
    "load_task_set",
    "mann_whitney_u",
    "miss_probability",
    "parse_task_set",
    "run_full",
    "simulate",
]
