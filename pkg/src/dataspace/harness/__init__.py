"""Scenario replay, trace validation and state persistence."""

from .scenario import (
    OP_NAMES,
    Assertion,
    AssertionReport,
    Scenario,
    ScenarioRun,
    Step,
    parse_scenario,
    run_scenario,
)
from .snapshot import CorruptSnapshot, restore, snapshot, state_hash
from .trace import (
    ConstraintViolation,
    MalformedTrace,
    TraceEvent,
    VerdictReport,
    format_trace,
    parse_trace,
    project,
    validate_trace,
)

__all__ = [
    "OP_NAMES",
    "Assertion",
    "AssertionReport",
    "Scenario",
    "ScenarioRun",
    "Step",
    "parse_scenario",
    "run_scenario",
    "CorruptSnapshot",
    "restore",
    "snapshot",
    "state_hash",
    "ConstraintViolation",
    "MalformedTrace",
    "TraceEvent",
    "VerdictReport",
    "format_trace",
    "parse_trace",
    "project",
    "validate_trace",
]
