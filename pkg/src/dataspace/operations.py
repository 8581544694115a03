"""The four data service methods as atomic state transitions.

Every call consumes exactly one clock tick. On failure the returned state
is the input state with the clock advanced and nothing else touched.
"""

from __future__ import annotations

from typing import Optional

from .automaton import AutomatonState, OpEvent, step
from .conditions import Condition, compatible
from .governance import evaluate, permits, request_context
from .model import (
    DataSpaceState,
    DataUnit,
    OpKind,
    OpResult,
    ReasonCode,
    header_violations,
)

__all__ = ["provide_data", "modify_data", "stop_data", "use_data"]


def _fail(state: DataSpaceState, reason: ReasonCode, d_id: Optional[str] = None) -> OpResult:
    return OpResult(0, state.tick(), reason, (d_id,) if d_id else ())


def _lifecycle(state: DataSpaceState, kind: OpKind, actor: str, d_id: str) -> dict:
    lifecycle = dict(state.lifecycle)
    lifecycle[d_id] = step(lifecycle.get(d_id, AutomatonState.Q0), OpEvent(kind, actor, d_id, 1))
    return lifecycle


def _unit_is_valid(state: DataSpaceState, d: DataUnit) -> bool:
    if header_violations(d, state.socials):
        return False
    return all(m in state.mechanisms for m in d.mechanisms)


def _allowed(state: DataSpaceState, kind: OpKind, o: str, d_id: str, purpose: Optional[str] = None) -> bool:
    ctx = request_context(state, o, d_id, purpose)
    return permits(evaluate(state, kind, o, d_id, ctx), kind)


def provide_data(state: DataSpaceState, o: str, d: DataUnit, cond: Condition = Condition()) -> OpResult:
    """Add ``d`` to D with ``cond`` as its provision condition."""
    if o not in state.orgs:
        return _fail(state, ReasonCode.UNKNOWN_ID, d.id)
    # ids are never reused, also not after Stop_Data
    if d.id in state.data or d.id in state.provider_of:
        return _fail(state, ReasonCode.DUPLICATE_ID, d.id)
    if not _unit_is_valid(state, d):
        return _fail(state, ReasonCode.INVALID_HEADER, d.id)
    if not _allowed(state, OpKind.PROVIDE_DATA, o, d.id):
        return _fail(state, ReasonCode.RULE_DENIED, d.id)
    new = state.evolve(
        data={**state.data, d.id: d},
        provider_of={**state.provider_of, d.id: o},
        provision_conditions={**state.provision_conditions, d.id: cond},
        lifecycle=_lifecycle(state, OpKind.PROVIDE_DATA, o, d.id),
        clock=state.clock + 1,
    )
    return OpResult(1, new, ReasonCode.OK, (d.id,))


def modify_data(state: DataSpaceState, o: str, d_id: str, d_new: DataUnit,
                cond: Condition = Condition()) -> OpResult:
    """Replace the provision terms of ``d_id``; the payload must stay identical."""
    if o not in state.orgs or d_id not in state.data:
        return _fail(state, ReasonCode.UNKNOWN_ID, d_id)
    if state.provider_of.get(d_id) != o:
        return _fail(state, ReasonCode.NOT_PROVIDER, d_id)
    if d_new.id != d_id or not _unit_is_valid(state, d_new):
        return _fail(state, ReasonCode.INVALID_HEADER, d_id)
    if d_new.payload.content_hash != state.data[d_id].payload.content_hash:
        return _fail(state, ReasonCode.PAYLOAD_CHANGED, d_id)
    if not _allowed(state, OpKind.MODIFY_DATA, o, d_id):
        return _fail(state, ReasonCode.RULE_DENIED, d_id)
    new = state.evolve(
        data={**state.data, d_id: d_new},
        provision_conditions={**state.provision_conditions, d_id: cond},
        lifecycle=_lifecycle(state, OpKind.MODIFY_DATA, o, d_id),
        clock=state.clock + 1,
    )
    return OpResult(1, new, ReasonCode.OK, (d_id,))


def stop_data(state: DataSpaceState, o: str, d_id: str, cond: Condition = Condition()) -> OpResult:
    """Terminate provision of ``d_id``. Provenance is kept for audit."""
    if o not in state.orgs or d_id not in state.data:
        return _fail(state, ReasonCode.UNKNOWN_ID, d_id)
    if state.provider_of.get(d_id) != o:
        return _fail(state, ReasonCode.NOT_PROVIDER, d_id)
    if not _allowed(state, OpKind.STOP_DATA, o, d_id):
        return _fail(state, ReasonCode.RULE_DENIED, d_id)
    new = state.evolve(
        data={k: v for k, v in state.data.items() if k != d_id},
        provision_conditions={k: v for k, v in state.provision_conditions.items() if k != d_id},
        lifecycle=_lifecycle(state, OpKind.STOP_DATA, o, d_id),
        clock=state.clock + 1,
    )
    return OpResult(1, new, ReasonCode.OK, (d_id,))


def use_data(state: DataSpaceState, o: str, d_id: str, cond_u: Condition = Condition(),
             purpose: Optional[str] = None) -> OpResult:
    """Use ``d_id`` under usage condition ``cond_u``. D is never changed."""
    if o not in state.orgs:
        return _fail(state, ReasonCode.UNKNOWN_ID, d_id)
    if d_id not in state.data:
        return _fail(state, ReasonCode.PRECEDENCE_VIOLATION, d_id)
    ctx = request_context(state, o, d_id, purpose)
    if not compatible(state.provision_conditions[d_id], cond_u, ctx):
        return _fail(state, ReasonCode.INCOMPATIBLE, d_id)
    if not permits(evaluate(state, OpKind.USE_DATA, o, d_id, ctx), OpKind.USE_DATA):
        return _fail(state, ReasonCode.RULE_DENIED, d_id)
    key = (o, d_id)
    new = state.evolve(
        uses={**state.uses, key: state.uses.get(key, 0) + 1},
        lifecycle=_lifecycle(state, OpKind.USE_DATA, o, d_id),
        clock=state.clock + 1,
    )
    return OpResult(1, new, ReasonCode.OK, (d_id,))
