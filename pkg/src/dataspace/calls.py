"""Operation calls as data, and a single dispatcher that applies them."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from .conditions import Condition
from .governance import modify_rule, provide_rule, stop_rule
from .model import DataSpaceState, DataUnit, OpKind, OpResult, Rule
from .operations import modify_data, provide_data, stop_data, use_data

__all__ = ["OpCall", "apply"]


@dataclass(frozen=True)
class OpCall:
    """One attempted operation.

    ``unit`` carries the data unit for Provide_Data/Modify_Data and ``rule``
    the rule for Provide_Rule/Modify_Rule. With ``keep_payload`` a
    Modify_Data call reuses whatever payload the target currently has.
    """

    kind: OpKind
    actor: str
    target: str
    cond: Condition = Condition()
    unit: Optional[DataUnit] = None
    rule: Optional[Rule] = None
    purpose: Optional[str] = None
    keep_payload: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", OpKind(self.kind))
        if self.kind in (OpKind.PROVIDE_DATA, OpKind.MODIFY_DATA) and self.unit is None:
            raise ValueError(f"{self.kind} needs a data unit")
        if self.kind in (OpKind.PROVIDE_RULE, OpKind.MODIFY_RULE) and self.rule is None:
            raise ValueError(f"{self.kind} needs a rule")

    @classmethod
    def provide_data(cls, actor: str, unit: DataUnit, cond: Condition = Condition()) -> "OpCall":
        return cls(OpKind.PROVIDE_DATA, actor, unit.id, cond, unit=unit)

    @classmethod
    def modify_data(cls, actor: str, d_id: str, unit: DataUnit, cond: Condition = Condition(),
                    keep_payload: bool = False) -> "OpCall":
        return cls(OpKind.MODIFY_DATA, actor, d_id, cond, unit=unit, keep_payload=keep_payload)

    @classmethod
    def stop_data(cls, actor: str, d_id: str, cond: Condition = Condition()) -> "OpCall":
        return cls(OpKind.STOP_DATA, actor, d_id, cond)

    @classmethod
    def use_data(cls, actor: str, d_id: str, cond: Condition = Condition(),
                 purpose: Optional[str] = None) -> "OpCall":
        return cls(OpKind.USE_DATA, actor, d_id, cond, purpose=purpose)

    @classmethod
    def provide_rule(cls, actor: str, rule: Rule, cond: Condition = Condition()) -> "OpCall":
        return cls(OpKind.PROVIDE_RULE, actor, rule.id, cond, rule=rule)

    @classmethod
    def modify_rule(cls, actor: str, r_id: str, rule: Rule, cond: Condition = Condition()) -> "OpCall":
        return cls(OpKind.MODIFY_RULE, actor, r_id, cond, rule=rule)

    @classmethod
    def stop_rule(cls, actor: str, r_id: str, cond: Condition = Condition()) -> "OpCall":
        return cls(OpKind.STOP_RULE, actor, r_id, cond)

    def __str__(self) -> str:
        return f"{self.kind.value}({self.actor},{self.target})"


def apply(state: DataSpaceState, call: OpCall) -> OpResult:
    k = call.kind
    if k is OpKind.PROVIDE_DATA:
        return provide_data(state, call.actor, call.unit, call.cond)
    if k is OpKind.MODIFY_DATA:
        unit = call.unit
        current = state.data.get(call.target)
        if call.keep_payload and current is not None:
            unit = replace(unit, payload=current.payload)
        return modify_data(state, call.actor, call.target, unit, call.cond)
    if k is OpKind.STOP_DATA:
        return stop_data(state, call.actor, call.target, call.cond)
    if k is OpKind.USE_DATA:
        return use_data(state, call.actor, call.target, call.cond, call.purpose)
    if k is OpKind.PROVIDE_RULE:
        return provide_rule(state, call.actor, call.rule, call.cond)
    if k is OpKind.MODIFY_RULE:
        return modify_rule(state, call.actor, call.target, call.rule, call.cond)
    return stop_rule(state, call.actor, call.target, call.cond)
