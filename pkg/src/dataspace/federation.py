"""Cross-space trust: mutual recognition of social mechanisms and the
interoperability check for data exchange between two data spaces.

An organization of space B reaches a data unit of space A through a virtual
actor whose credentials are its B credentials mapped through recognized
social-mechanism pairs. Nothing in either space is mutated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .conditions import Condition, clause_names, format_condition
from .model import DanglingReference, DataSpaceState, OpResult, Organization, ReasonCode, Role
from .operations import use_data

__all__ = [
    "RecognitionMap",
    "FederationBridge",
    "PremiseViolation",
    "FederationError",
    "InteropVerdict",
    "establish_recognition",
    "federated_use_data",
    "check_interoperability",
    "candidate_conditions",
]


class FederationError(ValueError):
    pass


class PremiseViolation(FederationError):
    """Nobody can use the data unit natively, so interoperability is undefined."""


@dataclass(frozen=True)
class RecognitionMap:
    """Recognized ``(social@A, social@B)`` pairs. Recognition always holds both ways."""

    pairs: frozenset[tuple[str, str]] = frozenset()
    symmetric: bool = field(default=True, init=False)

    def b_for_a(self, s_a: str) -> frozenset[str]:
        return frozenset(b for a, b in self.pairs if a == s_a)

    def a_for_b(self, s_b: str) -> frozenset[str]:
        return frozenset(a for a, b in self.pairs if b == s_b)

    def recognizes(self, s_a: str, s_b: str) -> bool:
        return (s_a, s_b) in self.pairs


@dataclass(frozen=True)
class FederationBridge:
    space_a: DataSpaceState
    space_b: DataSpaceState
    recognition: RecognitionMap = RecognitionMap()

    @property
    def credential_translation(self) -> dict[str, frozenset[str]]:
        """OrgId@A -> the B-side social mechanisms its credentials are recognized as."""
        return {
            oid: frozenset().union(*(self.recognition.b_for_a(c) for c in org.credentials))
            for oid, org in sorted(self.space_a.orgs.items())
        }

    def credentials_in_a(self, org_b: str) -> frozenset[str]:
        """A-side credentials of a B organization, derived from recognition."""
        org = self.space_b.orgs.get(org_b)
        if org is None:
            return frozenset()
        return frozenset().union(*(self.recognition.a_for_b(c) for c in org.credentials))


def establish_recognition(bridge: FederationBridge, s_i: str, s_j: str) -> FederationBridge:
    """Record mutual recognition between a social mechanism of each space.

    The arguments may be given in either order; the pair is oriented by which
    space each id resolves in.
    """
    a_socials, b_socials = bridge.space_a.socials, bridge.space_b.socials
    if s_i in a_socials and s_j in b_socials:
        pair = (s_i, s_j)
    elif s_j in a_socials and s_i in b_socials:
        pair = (s_j, s_i)
    else:
        missing = s_i if s_i not in a_socials and s_i not in b_socials else s_j
        raise DanglingReference(missing, "recognition pair")
    recognition = RecognitionMap(bridge.recognition.pairs | {pair})
    return FederationBridge(bridge.space_a, bridge.space_b, recognition)


def _directly_provided_to_b(bridge: FederationBridge, d_id: str) -> bool:
    return d_id in bridge.space_b.data or d_id in bridge.space_b.provider_of


def federated_use_data(bridge: FederationBridge, o: str, d_id: str, cond_u: Condition = Condition(),
                       purpose: Optional[str] = None) -> OpResult:
    """Use a unit of space A from organization ``o`` of space B.

    The returned state is ``bridge.space_a`` itself: federated use has no
    side effect on either space.
    """
    a = bridge.space_a
    if _directly_provided_to_b(bridge, d_id):
        raise FederationError(f"{d_id!r} was provided directly to space B")
    if o not in bridge.space_b.orgs:
        return OpResult(0, a, ReasonCode.UNKNOWN_ID)
    if d_id not in a.data:
        return OpResult(0, a, ReasonCode.PRECEDENCE_VIOLATION)
    creds = bridge.credentials_in_a(o)
    if not creds:
        return OpResult(0, a, ReasonCode.NO_RECOGNITION)
    virtual = Organization(o, frozenset({Role.USER.value}), creds)
    scratch = a.evolve(orgs={**a.orgs, o: virtual})
    res = use_data(scratch, o, d_id, cond_u, purpose)
    return OpResult(res.ret, a, res.reason)


def candidate_conditions(state: DataSpaceState, d_id: str) -> list[tuple[Condition, Optional[str]]]:
    """Finite (usage condition, purpose) candidates for ``d_id``.

    Conditions: wildcard, the provision condition itself, each single clause
    of it, and a requirement on the header's social mechanism. Purposes: none,
    then each purpose the provider names.
    """
    p = state.provision_conditions.get(d_id, Condition())
    conds = [Condition(), p] + [p.only(c) for c in clause_names(p)]
    unit = state.data.get(d_id)
    if unit is not None and unit.header.social is not None:
        conds.append(Condition(required_social=unit.header.social))
    seen: list[Condition] = []
    for c in conds:
        if c not in seen:
            seen.append(c)
    purposes: list[Optional[str]] = [None, *sorted(p.purposes or ())]
    return [(c, pu) for c in seen for pu in purposes]


@dataclass(frozen=True)
class InteropVerdict:
    data_id: str
    interoperable: bool
    witness: Optional[tuple[str, Condition]] = None
    purpose: Optional[str] = None

    def render(self) -> str:
        if not self.interoperable:
            return f"INTEROP {self.data_id} no"
        org, cond = self.witness
        line = f"INTEROP {self.data_id} yes {org} {format_condition(cond)}"
        return line + (f" {self.purpose}" if self.purpose else "")


def check_interoperability(bridge: FederationBridge, d_id: str) -> InteropVerdict:
    a = bridge.space_a
    if d_id not in a.data:
        raise PremiseViolation(f"{d_id!r} is not provided in space A")
    candidates = candidate_conditions(a, d_id)
    usable = any(
        use_data(a, o, d_id, c, pu).ret == 1
        for o in sorted(a.orgs) for c, pu in candidates
    )
    if not usable:
        raise PremiseViolation(f"no organization can use {d_id!r} in space A")
    for o in sorted(bridge.space_b.orgs):
        for c, pu in candidates:
            if federated_use_data(bridge, o, d_id, c, pu).ret == 1:
                return InteropVerdict(d_id, True, (o, c), pu)
    return InteropVerdict(d_id, False)
