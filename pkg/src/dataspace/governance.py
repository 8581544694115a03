"""Governance methods over the rule set and rule evaluation.

Rules select operations by kind, data unit and actor; a rule's guard is a
:class:`~dataspace.conditions.Condition` evaluated against the request
context. Deny overrides permit. When no rule applies the caller picks the
default: Use_Data is denied, everything else is permitted.
"""

from __future__ import annotations

import enum
from typing import Iterable, Optional, Protocol

from .automaton import AutomatonState, OpEvent, step
from .conditions import Condition, RequestContext, satisfies
from .model import (
    DataSpaceState,
    Effect,
    OpKind,
    OpResult,
    ReasonCode,
    Rule,
)

__all__ = [
    "Decision",
    "evaluate",
    "permits",
    "request_context",
    "provide_rule",
    "modify_rule",
    "stop_rule",
    "check_precedence",
    "rule_reference_errors",
]


class Decision(str, enum.Enum):
    PERMITTED = "permitted"
    DENIED = "denied"
    NO_APPLICABLE_RULE = "no-applicable-rule"


def request_context(
    state: DataSpaceState,
    actor: str,
    data_id: Optional[str] = None,
    purpose: Optional[str] = None,
    credentials: Optional[Iterable[str]] = None,
) -> RequestContext:
    """Build the evaluation context for ``actor`` acting on ``data_id`` now."""
    org = state.orgs.get(actor)
    creds = frozenset(credentials) if credentials is not None else (org.credentials if org else frozenset())
    data_social = None
    provider_creds: frozenset[str] = frozenset()
    uses = 0
    if data_id is not None:
        unit = state.data.get(data_id)
        if unit is not None:
            data_social = unit.header.social
        provider = state.orgs.get(state.provider_of.get(data_id, ""))
        if provider is not None:
            provider_creds = provider.credentials
        uses = state.uses.get((actor, data_id), 0)
    return RequestContext(
        actor=actor,
        clock=state.clock,
        actor_credentials=creds,
        uses_so_far=uses,
        purpose=purpose,
        data_social=data_social,
        provider_credentials=provider_creds,
    )


def evaluate(
    state: DataSpaceState,
    op_kind: OpKind,
    actor: str,
    d_id: Optional[str],
    ctx: RequestContext,
) -> Decision:
    matched = [
        r for _, r in sorted(state.rules.items())
        if r.selector.matches(OpKind(op_kind), actor, d_id) and satisfies(r.guard, ctx)
    ]
    if not matched:
        return Decision.NO_APPLICABLE_RULE
    if any(r.effect is Effect.DENY for r in matched):
        return Decision.DENIED
    return Decision.PERMITTED


def permits(decision: Decision, op_kind: OpKind) -> bool:
    """Apply the default policy to an evaluation outcome."""
    if decision is Decision.NO_APPLICABLE_RULE:
        return OpKind(op_kind) is not OpKind.USE_DATA
    return decision is Decision.PERMITTED


def _gate(state: DataSpaceState, op: OpKind, actor: str, d_id: Optional[str] = None,
          purpose: Optional[str] = None) -> bool:
    ctx = request_context(state, actor, d_id, purpose)
    return permits(evaluate(state, op, actor, d_id, ctx), op)


def _fail(state: DataSpaceState, reason: ReasonCode) -> OpResult:
    return OpResult(0, state.tick(), reason)


def rule_reference_errors(state: DataSpaceState, r: Rule) -> list[str]:
    """Unresolved references in a rule, in canonical order."""
    missing = []
    if r.social not in state.socials:
        missing.append(r.social or "<social>")
    if not r.selector.ops:
        missing.append("<op-kind>")
    if r.selector.actor is not None and r.selector.actor not in state.orgs:
        missing.append(r.selector.actor)
    for d in sorted(r.selector.data or ()):
        # rules may target units that were provided at some point
        if d not in state.provider_of:
            missing.append(d)
    return missing


def _advance(state: DataSpaceState, kind: OpKind, actor: str, target: str,
             units: Iterable[str]) -> tuple[dict, tuple[str, ...]]:
    lifecycle = dict(state.lifecycle)
    affected = tuple(sorted(units))
    event = OpEvent(kind, actor, target, 1)
    for d in affected:
        lifecycle[d] = step(lifecycle.get(d, AutomatonState.Q0), event)
    return lifecycle, affected


def provide_rule(state: DataSpaceState, o: str, r: Rule, cond: Condition = Condition()) -> OpResult:
    if o not in state.orgs:
        return _fail(state, ReasonCode.UNKNOWN_ID)
    if r.id in state.rules or r.id in state.issuer_of:
        return _fail(state, ReasonCode.DUPLICATE_ID)
    if r.issuer != o:
        return _fail(state, ReasonCode.NOT_ISSUER)
    if rule_reference_errors(state, r):
        return _fail(state, ReasonCode.UNKNOWN_ID)
    if not _gate(state, OpKind.PROVIDE_RULE, o):
        return _fail(state, ReasonCode.RULE_DENIED)
    covered = [d for d in state.data if r.selector.covers_data(d)]
    lifecycle, affected = _advance(state, OpKind.PROVIDE_RULE, o, r.id, covered)
    new = state.evolve(
        rules={**state.rules, r.id: r},
        issuer_of={**state.issuer_of, r.id: o},
        lifecycle=lifecycle,
        clock=state.clock + 1,
    )
    return OpResult(1, new, ReasonCode.OK, affected)


def modify_rule(state: DataSpaceState, o: str, r_id: str, r_new: Rule,
                cond: Condition = Condition()) -> OpResult:
    if o not in state.orgs or r_id not in state.rules:
        return _fail(state, ReasonCode.UNKNOWN_ID)
    if state.issuer_of.get(r_id) != o or r_new.issuer != o:
        return _fail(state, ReasonCode.NOT_ISSUER)
    if r_new.id != r_id or rule_reference_errors(state, r_new):
        return _fail(state, ReasonCode.UNKNOWN_ID)
    if not _gate(state, OpKind.MODIFY_RULE, o):
        return _fail(state, ReasonCode.RULE_DENIED)
    new = state.evolve(rules={**state.rules, r_id: r_new}, clock=state.clock + 1)
    return OpResult(1, new, ReasonCode.OK)


def _permitting_use(rule: Rule, d: str) -> bool:
    return (rule.effect is Effect.PERMIT and OpKind.USE_DATA in rule.selector.ops
            and rule.selector.covers_data(d))


def stop_rule(state: DataSpaceState, o: str, r_id: str, cond: Condition = Condition()) -> OpResult:
    if o not in state.orgs or r_id not in state.rules:
        return _fail(state, ReasonCode.UNKNOWN_ID)
    if state.issuer_of.get(r_id) != o:
        return _fail(state, ReasonCode.NOT_ISSUER)
    if not _gate(state, OpKind.STOP_RULE, o):
        return _fail(state, ReasonCode.RULE_DENIED)
    rule = state.rules[r_id]
    remaining = {k: v for k, v in state.rules.items() if k != r_id}
    # units under modification that just lost their last permitting rule
    orphaned = [
        d for d in state.data
        if state.lifecycle.get(d) is AutomatonState.QMOD
        and _permitting_use(rule, d)
        and not any(_permitting_use(x, d) for x in remaining.values())
    ]
    lifecycle, affected = _advance(state, OpKind.STOP_RULE, o, r_id, orphaned)
    new = state.evolve(rules=remaining, lifecycle=lifecycle, clock=state.clock + 1)
    return OpResult(1, new, ReasonCode.OK, affected)


class _Event(Protocol):
    kind: OpKind
    actor: str
    target: str
    ret: int


def check_precedence(history: Iterable[_Event], proposed: _Event) -> bool:
    """Whether the precedence constraints admit ``proposed`` after ``history``.

    Use_Data needs a live provision of the target by anyone; Modify_Data and
    Stop_Data need a live provision by the same actor. A provision is live
    until a successful Stop_Data on it.
    """
    kind = OpKind(proposed.kind)
    if kind not in (OpKind.USE_DATA, OpKind.MODIFY_DATA, OpKind.STOP_DATA):
        return True
    provider = None
    for e in history:
        if e.ret != 1 or e.target != proposed.target:
            continue
        k = OpKind(e.kind)
        if k is OpKind.PROVIDE_DATA:
            provider = e.actor
        elif k is OpKind.STOP_DATA:
            provider = None
    if provider is None:
        return False
    return kind is OpKind.USE_DATA or provider == proposed.actor
