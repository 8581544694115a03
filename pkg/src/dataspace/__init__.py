"""Executable engine for a data-space architecture model.

Organizations share data units under provision conditions, governed by
rules and social mechanisms. Every operation is a pure function from one
immutable state to the next, returning ``ret`` in {0, 1}.
"""

from .automaton import AutomatonState, OpEvent
from .calls import OpCall, apply
from .conditions import Condition, RequestContext, compatible, satisfies
from .model import (
    DataProvisionMechanism,
    DataSpaceState,
    DataUnit,
    Effect,
    Header,
    OpKind,
    OpResult,
    Organization,
    Payload,
    ReasonCode,
    Rule,
    Selector,
    SocialMechanism,
    new_data_space,
    validate_state,
)

__version__ = "0.1.0"

__all__ = [
    "AutomatonState",
    "OpEvent",
    "OpCall",
    "apply",
    "Condition",
    "RequestContext",
    "compatible",
    "satisfies",
    "DataProvisionMechanism",
    "DataSpaceState",
    "DataUnit",
    "Effect",
    "Header",
    "OpKind",
    "OpResult",
    "Organization",
    "Payload",
    "ReasonCode",
    "Rule",
    "Selector",
    "SocialMechanism",
    "new_data_space",
    "validate_state",
]
