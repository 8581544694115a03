"""Transaction lifecycle automaton.

Six states and the seven transitions driven by successful operations. The
transition function is total: failed events, and successful events with no
edge from the current state, leave the state where it is.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import Iterable

from .model import OpKind

__all__ = ["AutomatonState", "OpEvent", "TRANSITIONS", "step", "run", "success", "reachable_qf"]


class AutomatonState(str, enum.Enum):
    Q0 = "q0"          # initial, no data provision active
    Q1 = "q1"          # data provided
    Q2 = "q2"          # rules established
    QF = "q_f"         # active collaboration
    QMOD = "q_mod"     # under modification
    QSTOP = "q_stop"   # terminated, absorbing

    def __str__(self) -> str:
        return self.value


Q0, Q1, Q2, QF, QMOD, QSTOP = AutomatonState


@dataclass(frozen=True)
class OpEvent:
    kind: OpKind
    actor: str
    target: str
    ret: int

    def __post_init__(self):
        object.__setattr__(self, "kind", OpKind(self.kind))
        if self.ret not in (0, 1):
            raise ValueError(f"ret must be 0 or 1, got {self.ret!r}")

    def __str__(self) -> str:
        return f"{self.kind.value}({self.actor},{self.target})={self.ret}"


def _edges() -> dict[tuple[AutomatonState, OpKind], AutomatonState]:
    table = {
        (Q0, OpKind.PROVIDE_DATA): Q1,
        (Q1, OpKind.PROVIDE_RULE): Q2,
        (Q2, OpKind.USE_DATA): QF,
        (QF, OpKind.MODIFY_DATA): QMOD,
        (QMOD, OpKind.USE_DATA): QF,
        (QMOD, OpKind.STOP_RULE): QSTOP,
    }
    # Stop_Data terminates from any state
    for q in AutomatonState:
        table[(q, OpKind.STOP_DATA)] = QSTOP
    return table


TRANSITIONS: dict[tuple[AutomatonState, OpKind], AutomatonState] = _edges()


def step(s: AutomatonState, e: OpEvent) -> AutomatonState:
    if e.ret != 1:
        return s
    return TRANSITIONS.get((s, e.kind), s)


def run(trace: Iterable[OpEvent]) -> AutomatonState:
    s = Q0
    for e in trace:
        s = step(s, e)
    return s


def success(trace: Iterable[OpEvent]) -> bool:
    return run(trace) is QF


def reachable_qf(start: AutomatonState) -> bool:
    """Whether any sequence of successful operations leads from ``start`` to q_f."""
    seen = {start}
    queue = deque([start])
    while queue:
        q = queue.popleft()
        if q is QF:
            return True
        for (src, _), dst in TRANSITIONS.items():
            if src is q and dst not in seen:
                seen.add(dst)
                queue.append(dst)
    return False
