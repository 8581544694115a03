"""Random spaces and calls for the property and acceptance suites.

Everything is driven by a ``random.Random`` so hypothesis can supply seeds
and the acceptance suite can run fixed, reproducible batches.
"""

from __future__ import annotations

import random

from dataspace.calls import OpCall, apply
from dataspace.conditions import Condition
from dataspace.model import (
    DataProvisionMechanism,
    DataUnit,
    Effect,
    Header,
    OpKind,
    Organization,
    Payload,
    Rule,
    Selector,
    SocialMechanism,
    new_data_space,
)

ORGS = ("o1", "o2", "o3")
DATA = ("d1", "d2", "d3")
RULES = ("r1", "r2", "r3")
SOCIALS = ("s1", "s2")
PURPOSES = ("analytics", "design", "resale")
PAYLOADS = ("alpha", "beta")
KINDS = tuple(OpKind)


def _maybe(rng: random.Random, p: float = 0.3) -> bool:
    return rng.random() < p


def _subset(rng: random.Random, items, min_size: int = 0) -> frozenset:
    chosen = frozenset(x for x in items if _maybe(rng, 0.5))
    if len(chosen) < min_size:
        chosen = frozenset({rng.choice(items)})
    return chosen


def condition(rng: random.Random, orgs=ORGS) -> Condition:
    lo = rng.randint(0, 8)
    return Condition(
        allowed_orgs=_subset(rng, orgs, 1) if _maybe(rng) else None,
        purposes=_subset(rng, PURPOSES, 1) if _maybe(rng) else None,
        valid_window=(lo, lo + rng.randint(0, 8)) if _maybe(rng, 0.2) else None,
        required_social=rng.choice(SOCIALS) if _maybe(rng, 0.2) else None,
        max_uses=rng.randint(1, 3) if _maybe(rng, 0.15) else None,
    )


def unit(rng: random.Random, d_id: str) -> DataUnit:
    attrs = {"format": rng.choice(("csv", "json"))}
    if not _maybe(rng, 0.1):
        attrs["social"] = rng.choice(SOCIALS + ("s9",)) if _maybe(rng, 0.1) else rng.choice(SOCIALS)
    return DataUnit(d_id, Header(attrs), Payload.from_bytes(rng.choice(PAYLOADS)), frozenset({"m1"}))


def rule(rng: random.Random, r_id: str, issuer: str, orgs=ORGS, data=DATA) -> Rule:
    ops = _subset(rng, (OpKind.USE_DATA, OpKind.MODIFY_DATA, OpKind.STOP_DATA, OpKind.PROVIDE_RULE), 1)
    if _maybe(rng, 0.6):
        ops = frozenset({OpKind.USE_DATA})
    return Rule(
        r_id,
        issuer,
        Selector(ops, _subset(rng, data, 1) if _maybe(rng, 0.5) else None,
                 rng.choice(orgs) if _maybe(rng, 0.2) else None),
        condition(rng, orgs) if _maybe(rng, 0.3) else Condition(),
        Effect.DENY if _maybe(rng, 0.25) else Effect.PERMIT,
        rng.choice(SOCIALS),
    )


def space(rng: random.Random, n_orgs: int | None = None):
    n = n_orgs or rng.randint(1, 3)
    orgs = [
        Organization(o, frozenset({"provider", "user"}), _subset(rng, SOCIALS))
        for o in ORGS[:n]
    ]
    socials = [SocialMechanism(s) for s in SOCIALS]
    return new_data_space(orgs, [DataProvisionMechanism("m1")], socials)


def call(rng: random.Random, state=None) -> OpCall:
    """A random call over the bounded id universe. Actors may be unknown."""
    orgs = tuple(state.orgs) if state is not None and state.orgs else ORGS
    actor = rng.choice(orgs + ("o9",)) if _maybe(rng, 0.05) else rng.choice(orgs)
    d, r = rng.choice(DATA), rng.choice(RULES)
    kind = rng.choice(KINDS)
    purpose = rng.choice((None,) + PURPOSES)
    if kind is OpKind.PROVIDE_DATA:
        return OpCall.provide_data(actor, unit(rng, d), condition(rng))
    if kind is OpKind.MODIFY_DATA:
        u = unit(rng, d if not _maybe(rng, 0.05) else rng.choice(DATA))
        return OpCall.modify_data(actor, d, u, condition(rng), keep_payload=_maybe(rng, 0.7))
    if kind is OpKind.STOP_DATA:
        return OpCall.stop_data(actor, d)
    if kind is OpKind.USE_DATA:
        return OpCall.use_data(actor, d, condition(rng) if _maybe(rng, 0.4) else Condition(), purpose)
    issuer = actor if not _maybe(rng, 0.1) else rng.choice(orgs)
    if kind is OpKind.PROVIDE_RULE:
        return OpCall.provide_rule(actor, rule(rng, r, issuer))
    if kind is OpKind.MODIFY_RULE:
        return OpCall.modify_rule(actor, r, rule(rng, r, issuer))
    return OpCall.stop_rule(actor, r)


def populated(rng: random.Random, steps: int = 12):
    """A space after a random warm-up, biased towards successful calls."""
    state = space(rng)
    for _ in range(steps):
        state = apply(state, call(rng, state)).state
    return state


PEER_SOCIAL = {"s1": "t1", "s2": "t2"}


def exchange_space(rng: random.Random):
    """Space A for federation: o1 provides d1..d3, one Use rule, random conditions.

    Users hold at least one credential: a peer needs some recognized credential
    before it can act in A at all.
    """
    orgs = [Organization("o1", frozenset({"provider"}), frozenset({"s1", "s2"}))] + [
        Organization(o, frozenset({"user"}), _subset(rng, SOCIALS, 1)) for o in ("o2", "o3")
    ]
    state = new_data_space(orgs, [DataProvisionMechanism("m1")], [SocialMechanism(s) for s in SOCIALS])
    for d in DATA[: rng.randint(1, 3)]:
        u = DataUnit(d, Header(social=rng.choice(SOCIALS)), Payload.from_bytes(d), frozenset({"m1"}))
        state = apply(state, OpCall.provide_data("o1", u, condition(rng, ("o1", "o2", "o3")))).state
    r = Rule("r1", "o1", Selector(frozenset({OpKind.USE_DATA})), Condition(), Effect.PERMIT, "s1")
    state = apply(state, OpCall.provide_rule("o1", r)).state
    if _maybe(rng, 0.3):
        deny = Rule("r2", "o1", Selector(frozenset({OpKind.USE_DATA}), actor=rng.choice(("o2", "o3"))),
                    Condition(), Effect.DENY, "s2")
        state = apply(state, OpCall.provide_rule("o1", deny)).state
    return state


def mirrored_bridge(state_a, pairs=PEER_SOCIAL):
    """Space B mirrors A's users under renamed socials; ``pairs`` are recognized."""
    from dataspace.federation import FederationBridge, establish_recognition

    peers = [
        Organization(o.id, frozenset({"user"}), frozenset(PEER_SOCIAL[c] for c in o.credentials))
        for o in state_a.orgs.values() if o.id != "o1"
    ]
    space_b = new_data_space(peers, [], [SocialMechanism(t) for t in PEER_SOCIAL.values()])
    bridge = FederationBridge(state_a, space_b)
    for a, b in sorted(pairs.items()):
        bridge = establish_recognition(bridge, a, b)
    return bridge
