"""Component sets of a data space and the immutable composite state.

The state holds organizations, provision mechanisms, data units, social
mechanisms and rules, plus the engine bookkeeping every operation needs:
provenance maps, a logical clock, per-unit lifecycle states, recorded
provision conditions and per-actor use counters.

States are values. Nothing here mutates a state after construction; the
operation modules build new ones with :func:`dataclasses.replace`.
"""

from __future__ import annotations

import datetime as _dt
import enum
import hashlib
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Any, Iterable, Mapping, Optional, Union

from .conditions import Condition

__all__ = [
    "OpKind",
    "Role",
    "Organization",
    "SocialMechanism",
    "DataProvisionMechanism",
    "AttributeValue",
    "Header",
    "Payload",
    "DataUnit",
    "Effect",
    "Selector",
    "Rule",
    "ReasonCode",
    "OpResult",
    "DataSpaceState",
    "DanglingReference",
    "Violation",
    "new_data_space",
    "validate_state",
    "header_violations",
]


class OpKind(str, enum.Enum):
    PROVIDE_DATA = "Provide_Data"
    MODIFY_DATA = "Modify_Data"
    STOP_DATA = "Stop_Data"
    USE_DATA = "Use_Data"
    PROVIDE_RULE = "Provide_Rule"
    MODIFY_RULE = "Modify_Rule"
    STOP_RULE = "Stop_Rule"

    def __str__(self) -> str:
        return self.value

    @property
    def is_governance(self) -> bool:
        return self in (OpKind.PROVIDE_RULE, OpKind.MODIFY_RULE, OpKind.STOP_RULE)


DATA_OPS = (OpKind.PROVIDE_DATA, OpKind.MODIFY_DATA, OpKind.STOP_DATA, OpKind.USE_DATA)


class Role(str, enum.Enum):
    PROVIDER = "provider"
    USER = "user"
    AUTHENTICATOR = "authenticator"
    TRUST_ORG = "trust-org"
    CLEARING_HOUSE = "clearing-house"
    MARKETPLACE = "marketplace"


class DanglingReference(ValueError):
    """An identifier refers to something absent from the state."""

    def __init__(self, symbol: str, where: str = ""):
        super().__init__(f"dangling reference {symbol!r}" + (f" in {where}" if where else ""))
        self.symbol = symbol
        self.where = where


def _ids(items: Iterable[str]) -> frozenset[str]:
    if isinstance(items, str):
        raise TypeError("expected a collection of identifiers, got a bare string")
    return frozenset(items)


@dataclass(frozen=True)
class Organization:
    id: str
    roles: frozenset[str] = frozenset({Role.PROVIDER.value, Role.USER.value})
    credentials: frozenset[str] = frozenset()

    def __post_init__(self):
        roles = frozenset(r.value if isinstance(r, Role) else str(r) for r in _ids(self.roles))
        unknown = roles - {r.value for r in Role}
        if unknown:
            raise ValueError(f"unknown role(s) {sorted(unknown)} for organization {self.id!r}")
        object.__setattr__(self, "roles", roles)
        object.__setattr__(self, "credentials", _ids(self.credentials))

    # organizations decompose over their roles
    @property
    def capabilities(self) -> frozenset[str]:
        return self.roles


@dataclass(frozen=True)
class SocialMechanism:
    id: str
    kind: str = "identity-verification"
    capabilities: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "capabilities", _ids(self.capabilities))


@dataclass(frozen=True)
class DataProvisionMechanism:
    id: str
    kind: str = "api-endpoint"
    capabilities: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "capabilities", _ids(self.capabilities))


AttributeValue = Union[str, int, _dt.datetime, frozenset]

# attribute types with a declared value type
SOCIAL, TIMESTAMP, FORMAT = "social", "timestamp", "format"


def _norm_attr(value: Any) -> AttributeValue:
    if isinstance(value, bool):
        raise TypeError("boolean attribute values are not supported")
    if isinstance(value, (str, int, _dt.datetime)):
        return value
    if isinstance(value, (set, frozenset, list, tuple)):
        if not all(isinstance(v, str) for v in value):
            raise TypeError("set attributes hold strings only")
        return frozenset(value)
    raise TypeError(f"unsupported attribute value {value!r}")


@dataclass(frozen=True, init=False)
class Header:
    """Typed attributes of a data unit, stored as sorted ``(type, value)`` pairs."""

    pairs: tuple[tuple[str, AttributeValue], ...] = ()

    def __init__(self, attributes: Optional[Mapping[str, Any]] = None, **kw: Any):
        attrs = dict(attributes or {}, **kw)
        object.__setattr__(self, "pairs", tuple(sorted((str(k), _norm_attr(v)) for k, v in attrs.items())))

    @property
    def attributes(self) -> Mapping[str, AttributeValue]:
        return MappingProxyType(dict(self.pairs))

    def get(self, key: str, default: Any = None) -> Any:
        return self.attributes.get(key, default)

    def __contains__(self, key: str) -> bool:
        return key in self.attributes

    @property
    def social(self) -> Optional[str]:
        v = self.get(SOCIAL)
        return v if isinstance(v, str) else None

    def with_attrs(self, **kw: Any) -> "Header":
        return Header({**self.attributes, **kw})

    def without(self, key: str) -> "Header":
        return Header({k: v for k, v in self.pairs if k != key})


@dataclass(frozen=True)
class Payload:
    """Opaque content reference: a SHA-256 digest and optional inline bytes."""

    content_hash: str
    inline: Optional[bytes] = None
    structured: bool = False

    def __post_init__(self):
        if self.inline is not None and hashlib.sha256(self.inline).hexdigest() != self.content_hash:
            raise ValueError("inline bytes do not match content_hash")

    @classmethod
    def from_bytes(cls, content: Union[bytes, str], structured: bool = False) -> "Payload":
        if isinstance(content, str):
            content = content.encode("utf-8")
        return cls(hashlib.sha256(content).hexdigest(), content, structured)


@dataclass(frozen=True)
class DataUnit:
    id: str
    header: Header
    payload: Payload
    mechanisms: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "mechanisms", _ids(self.mechanisms))


class Effect(str, enum.Enum):
    PERMIT = "permit"
    DENY = "deny"


@dataclass(frozen=True)
class Selector:
    """Which attempted operations a rule applies to.

    ``data`` and ``actor`` of ``None`` match anything. Rule operations carry
    no data target, so a rule with a data filter never matches them.
    """

    ops: frozenset[OpKind]
    data: Optional[frozenset[str]] = None
    actor: Optional[str] = None

    def __post_init__(self):
        ops = {self.ops} if isinstance(self.ops, str) else self.ops
        object.__setattr__(self, "ops", frozenset(OpKind(o) for o in ops))
        if self.data is not None:
            object.__setattr__(self, "data", _ids(self.data))

    def matches(self, op: OpKind, actor: str, data_id: Optional[str]) -> bool:
        if op not in self.ops:
            return False
        if self.actor is not None and self.actor != actor:
            return False
        if self.data is not None and data_id not in self.data:
            return False
        return True

    def covers_data(self, data_id: str) -> bool:
        return self.data is None or data_id in self.data


@dataclass(frozen=True)
class Rule:
    id: str
    issuer: str
    selector: Selector
    guard: Condition = Condition()
    effect: Effect = Effect.PERMIT
    social: str = ""

    def __post_init__(self):
        object.__setattr__(self, "effect", Effect(self.effect))


class ReasonCode(str, enum.Enum):
    OK = "ok"
    PRECEDENCE_VIOLATION = "precedence-violation"
    NOT_PROVIDER = "not-provider"
    NOT_ISSUER = "not-issuer"
    RULE_DENIED = "rule-denied"
    INCOMPATIBLE = "incompatible"
    DUPLICATE_ID = "duplicate-id"
    UNKNOWN_ID = "unknown-id"
    INVALID_HEADER = "invalid-header"
    PAYLOAD_CHANGED = "payload-changed"
    NO_RECOGNITION = "no-recognition"

    def __str__(self) -> str:
        return self.value


def _frozen_map(m: Optional[Mapping]) -> Mapping:
    return MappingProxyType(dict(m or {}))


@dataclass(frozen=True, eq=False)
class DataSpaceState:
    """The composite state. Equality and hashing go through the canonical snapshot."""

    orgs: Mapping[str, Organization] = field(default_factory=dict)
    mechanisms: Mapping[str, DataProvisionMechanism] = field(default_factory=dict)
    data: Mapping[str, DataUnit] = field(default_factory=dict)
    socials: Mapping[str, SocialMechanism] = field(default_factory=dict)
    rules: Mapping[str, Rule] = field(default_factory=dict)
    provider_of: Mapping[str, str] = field(default_factory=dict)
    issuer_of: Mapping[str, str] = field(default_factory=dict)
    clock: int = 0
    lifecycle: Mapping[str, Any] = field(default_factory=dict)
    provision_conditions: Mapping[str, Condition] = field(default_factory=dict)
    # (actor, data id) -> successful Use_Data count
    uses: Mapping[tuple[str, str], int] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("orgs", "mechanisms", "data", "socials", "rules", "provider_of",
                     "issuer_of", "lifecycle", "provision_conditions", "uses"):
            object.__setattr__(self, name, _frozen_map(getattr(self, name)))
        if self.clock < 0:
            raise ValueError("clock must be non-negative")

    # set-style views named after the component sets
    O = property(lambda self: frozenset(self.orgs))
    M = property(lambda self: frozenset(self.mechanisms))
    D = property(lambda self: frozenset(self.data))
    S = property(lambda self: frozenset(self.socials))
    R = property(lambda self: frozenset(self.rules))

    def evolve(self, **changes: Any) -> "DataSpaceState":
        return replace(self, **changes)

    def tick(self) -> "DataSpaceState":
        return replace(self, clock=self.clock + 1)

    @property
    def digest(self) -> str:
        from .harness import state_hash

        return state_hash(self)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DataSpaceState):
            return NotImplemented
        return self.digest == other.digest

    def __hash__(self) -> int:
        return hash(self.digest)

    def __repr__(self) -> str:
        return (f"DataSpaceState(|O|={len(self.orgs)}, |M|={len(self.mechanisms)}, |D|={len(self.data)}, "
                f"|S|={len(self.socials)}, |R|={len(self.rules)}, clock={self.clock})")


@dataclass(frozen=True)
class OpResult:
    ret: int
    state: DataSpaceState
    reason: ReasonCode = ReasonCode.OK
    # data units whose lifecycle automaton observes this event
    affects: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.ret == 1


def _index(items: Iterable, what: str) -> dict:
    out: dict = {}
    for item in items:
        if item.id in out:
            raise ValueError(f"duplicate {what} id {item.id!r}")
        out[item.id] = item
    return out


def new_data_space(
    orgs: Iterable[Organization] = (),
    mechs: Iterable[DataProvisionMechanism] = (),
    socials: Iterable[SocialMechanism] = (),
) -> DataSpaceState:
    """Empty-D, empty-R state over the given participants and infrastructure."""
    o, m, s = _index(orgs, "organization"), _index(mechs, "mechanism"), _index(socials, "social mechanism")
    for org in sorted(o.values(), key=lambda x: x.id):
        for cred in sorted(org.credentials):
            if cred not in s:
                raise DanglingReference(cred, f"credentials of {org.id}")
    return DataSpaceState(orgs=o, mechanisms=m, socials=s)


@dataclass(frozen=True)
class Violation:
    kind: str
    subject: str
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.kind}({self.subject})" + (f": {self.detail}" if self.detail else "")


def header_violations(unit: DataUnit, socials: Mapping[str, Any] | frozenset[str]) -> list[Violation]:
    """Header and mechanism-set checks for one data unit (mechanism existence excluded)."""
    out = []
    h = unit.header
    if SOCIAL not in h:
        out.append(Violation("MissingMandatoryAttribute", unit.id, SOCIAL))
    elif not isinstance(h.get(SOCIAL), str):
        out.append(Violation("InvalidAttribute", unit.id, "social must be an identifier"))
    elif h.get(SOCIAL) not in socials:
        out.append(Violation("DanglingReference", unit.id, f"header social {h.get(SOCIAL)}"))
    if TIMESTAMP in h and not isinstance(h.get(TIMESTAMP), _dt.datetime):
        out.append(Violation("InvalidAttribute", unit.id, "timestamp must be a timestamp"))
    if FORMAT in h and not isinstance(h.get(FORMAT), str):
        out.append(Violation("InvalidAttribute", unit.id, "format must be a string"))
    if not unit.mechanisms:
        out.append(Violation("EmptyMechanismSet", unit.id))
    return out


def validate_state(state: DataSpaceState) -> list[Violation]:
    """Every broken structural invariant, in canonical order. Empty means valid."""
    v: list[Violation] = []
    for table, what in ((state.orgs, "org"), (state.mechanisms, "mech"), (state.data, "data"),
                        (state.socials, "social"), (state.rules, "rule")):
        for key in sorted(table):
            if not key or table[key].id != key:
                v.append(Violation("IdMismatch", key, what))
    for oid in sorted(state.orgs):
        org = state.orgs[oid]
        if not org.roles:
            v.append(Violation("EmptyRoles", oid))
        for cred in sorted(org.credentials):
            if cred not in state.socials:
                v.append(Violation("DanglingReference", oid, f"credential {cred}"))
    for did in sorted(state.data):
        unit = state.data[did]
        v.extend(header_violations(unit, state.socials))
        for mid in sorted(unit.mechanisms):
            if mid not in state.mechanisms:
                v.append(Violation("DanglingReference", did, f"mechanism {mid}"))
        if did not in state.provider_of:
            v.append(Violation("MissingProvider", did))
        if did not in state.provision_conditions:
            v.append(Violation("MissingCondition", did))
    for did in sorted(state.provider_of):
        if state.provider_of[did] not in state.orgs:
            v.append(Violation("DanglingReference", did, f"provider {state.provider_of[did]}"))
    for rid in sorted(state.rules):
        rule = state.rules[rid]
        if rule.social not in state.socials:
            v.append(Violation("DanglingReference", rid, f"social {rule.social}"))
        if not rule.selector.ops:
            v.append(Violation("EmptySelector", rid))
        if state.issuer_of.get(rid) != rule.issuer:
            v.append(Violation("IssuerMismatch", rid))
        if rule.issuer not in state.orgs:
            v.append(Violation("DanglingReference", rid, f"issuer {rule.issuer}"))
    for did in sorted(state.lifecycle):
        if did not in state.provider_of:
            v.append(Violation("OrphanLifecycle", did))
    return v
