"""Trace events, their line format, and trace validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ..automaton import AutomatonState, OpEvent, step
from ..governance import check_precedence
from ..model import OpKind, ReasonCode

__all__ = [
    "TraceEvent",
    "MalformedTrace",
    "ConstraintViolation",
    "VerdictReport",
    "format_event",
    "format_trace",
    "parse_trace",
    "validate_trace",
    "project",
]


class MalformedTrace(ValueError):
    pass


@dataclass(frozen=True)
class TraceEvent:
    clock: int
    kind: OpKind
    actor: str
    target: str
    ret: int
    reason: ReasonCode
    state_hash: str = ""
    affects: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "kind", OpKind(self.kind))
        object.__setattr__(self, "reason", ReasonCode(self.reason))
        object.__setattr__(self, "affects", tuple(self.affects))

    @property
    def event(self) -> OpEvent:
        return OpEvent(self.kind, self.actor, self.target, self.ret)


def format_event(e: TraceEvent) -> str:
    line = (f"t={e.clock} op={e.kind.value} actor={e.actor} target={e.target} "
            f"ret={e.ret} reason={e.reason.value}")
    line += " affects=" + (",".join(e.affects) if e.affects else "-")
    if e.state_hash:
        line += f" hash={e.state_hash}"
    return line


def format_trace(trace: Iterable[TraceEvent]) -> str:
    return "".join(format_event(e) + "\n" for e in trace)


_REQUIRED = ("t", "op", "actor", "target", "ret", "reason")


def parse_trace(text: str) -> list[TraceEvent]:
    events = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = {}
        for part in line.split():
            key, sep, value = part.partition("=")
            if not sep:
                raise MalformedTrace(f"line {lineno}: expected key=value, got {part!r}")
            fields[key] = value
        missing = [k for k in _REQUIRED if k not in fields]
        if missing:
            raise MalformedTrace(f"line {lineno}: missing field(s) {', '.join(missing)}")
        try:
            ret = int(fields["ret"])
            affects = fields.get("affects", "-")
            events.append(TraceEvent(
                clock=int(fields["t"]),
                kind=OpKind(fields["op"]),
                actor=fields["actor"],
                target=fields["target"],
                ret=ret,
                reason=ReasonCode(fields["reason"]),
                state_hash=fields.get("hash", ""),
                affects=() if affects == "-" else tuple(affects.split(",")),
            ))
        except ValueError as exc:
            raise MalformedTrace(f"line {lineno}: {exc}") from None
        if ret not in (0, 1):
            raise MalformedTrace(f"line {lineno}: ret must be 0 or 1")
    return events


def project(trace: Sequence[TraceEvent], data_id: str) -> list[OpEvent]:
    """Events the lifecycle automaton of ``data_id`` observes."""
    return [e.event for e in trace if data_id in e.affects]


_EQ_LABEL = {
    OpKind.USE_DATA: "use-precedence",
    OpKind.MODIFY_DATA: "modify-precedence",
    OpKind.STOP_DATA: "stop-precedence",
}


@dataclass(frozen=True)
class ConstraintViolation:
    index: int
    constraint: str
    event: TraceEvent

    def __str__(self) -> str:
        e = self.event
        return f"ConstraintViolation({self.constraint}) at {self.index}: {e.kind.value}({e.actor},{e.target})=1"


@dataclass
class VerdictReport:
    transitions: list[str] = field(default_factory=list)
    violations: list[ConstraintViolation] = field(default_factory=list)
    final_states: dict[str, AutomatonState] = field(default_factory=dict)

    @property
    def verdicts(self) -> dict[str, bool]:
        return {d: q is AutomatonState.QF for d, q in self.final_states.items()}

    @property
    def ok(self) -> bool:
        return not self.violations

    def render(self) -> str:
        lines = list(self.transitions)
        for v in self.violations:
            lines.append(str(v))
        for d in sorted(self.final_states):
            q = self.final_states[d]
            verdict = "SUCCESS" if q is AutomatonState.QF else "NOT-SUCCESS"
            lines.append(f"{d} {q.value} {verdict}")
        return "\n".join(lines) + "\n"


def validate_trace(trace: Sequence[TraceEvent]) -> VerdictReport:
    """Replay a trace through the automaton and the precedence checker."""
    for prev, cur in zip(trace, trace[1:]):
        if cur.clock != prev.clock + 1:
            raise MalformedTrace(f"clock jumps from {prev.clock} to {cur.clock}")
    report = VerdictReport()
    states: dict[str, AutomatonState] = {}
    for e in trace:
        if e.kind in _EQ_LABEL:
            states.setdefault(e.target, AutomatonState.Q0)
        for d in e.affects:
            states.setdefault(d, AutomatonState.Q0)
    for idx, e in enumerate(trace):
        if e.ret == 1 and not check_precedence(trace[:idx], e):
            report.violations.append(ConstraintViolation(idx, _EQ_LABEL[e.kind], e))
        label = f"{e.kind.value}({e.actor},{e.target})={e.ret}"
        if not e.affects:
            report.transitions.append(f"{idx} - --{label}--> -")
        for d in e.affects:
            before = states[d]
            after = step(before, e.event)
            states[d] = after
            tag = label if d == e.target else f"{label}@{d}"
            report.transitions.append(f"{idx} {before.value} --{tag}--> {after.value}")
    report.final_states = states
    return report
