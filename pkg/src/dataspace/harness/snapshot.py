"""Canonical JSON snapshots of a data-space state.

The document has sorted keys, fixed indentation, and one top-level entry per
component set plus the bookkeeping maps. Its SHA-256 is the state's identity.
"""

from __future__ import annotations

import base64
import datetime as dt
import hashlib
import json
from typing import Any

from ..automaton import AutomatonState
from ..conditions import Condition
from ..model import (
    DataProvisionMechanism,
    DataSpaceState,
    DataUnit,
    Effect,
    Header,
    Organization,
    Payload,
    Rule,
    Selector,
    SocialMechanism,
)

__all__ = ["CorruptSnapshot", "snapshot", "restore", "state_hash", "dumps", "to_doc", "from_doc",
           "unit_to_json", "unit_from_json", "rule_to_json", "rule_from_json",
           "element_to_json", "element_from_json"]

FORMAT_VERSION = 1


class CorruptSnapshot(ValueError):
    pass


def dumps(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=True) + "\n"


def _attr_to_json(value: Any) -> dict[str, Any]:
    if isinstance(value, dt.datetime):
        return {"type": "timestamp", "value": value.isoformat()}
    if isinstance(value, frozenset):
        return {"type": "set", "value": sorted(value)}
    if isinstance(value, int):
        return {"type": "integer", "value": value}
    return {"type": "string", "value": value}


def _attr_from_json(doc: dict[str, Any]) -> Any:
    kind, value = doc["type"], doc["value"]
    if kind == "timestamp":
        return dt.datetime.fromisoformat(value)
    if kind == "set":
        return frozenset(value)
    if kind == "integer":
        if not isinstance(value, int):
            raise TypeError("integer attribute")
        return value
    if kind == "string":
        if not isinstance(value, str):
            raise TypeError("string attribute")
        return value
    raise ValueError(f"unknown attribute type {kind!r}")


def unit_to_json(d: DataUnit) -> dict[str, Any]:
    return {
        "header": {k: _attr_to_json(v) for k, v in d.header.pairs},
        "payload": {
            "hash": d.payload.content_hash,
            "inline": base64.b64encode(d.payload.inline).decode("ascii") if d.payload.inline is not None else None,
            "structured": d.payload.structured,
        },
        "mechanisms": sorted(d.mechanisms),
    }


def unit_from_json(did: str, doc: dict[str, Any]) -> DataUnit:
    p = doc["payload"]
    inline = base64.b64decode(p["inline"], validate=True) if p.get("inline") is not None else None
    return DataUnit(
        id=did,
        header=Header({k: _attr_from_json(v) for k, v in doc["header"].items()}),
        payload=Payload(p["hash"], inline, bool(p["structured"])),
        mechanisms=frozenset(doc["mechanisms"]),
    )


def rule_to_json(r: Rule) -> dict[str, Any]:
    sel = r.selector
    return {
        "issuer": r.issuer,
        "selector": {
            "ops": sorted(o.value for o in sel.ops),
            "data": sorted(sel.data) if sel.data is not None else None,
            "actor": sel.actor,
        },
        "guard": r.guard.to_json(),
        "effect": r.effect.value,
        "social": r.social,
    }


def rule_from_json(rid: str, doc: dict[str, Any]) -> Rule:
    sel = doc["selector"]
    return Rule(
        id=rid,
        issuer=doc["issuer"],
        selector=Selector(frozenset(sel["ops"]),
                          frozenset(sel["data"]) if sel["data"] is not None else None,
                          sel["actor"]),
        guard=Condition.from_json(doc["guard"]),
        effect=Effect(doc["effect"]),
        social=doc["social"],
    )


def element_to_json(x: Any) -> dict[str, Any]:
    """Encode an O, M, D or S element together with its set tag."""
    if isinstance(x, Organization):
        return {"set": "O", "id": x.id, "roles": sorted(x.roles), "credentials": sorted(x.credentials)}
    if isinstance(x, DataProvisionMechanism):
        return {"set": "M", "id": x.id, "kind": x.kind, "capabilities": sorted(x.capabilities)}
    if isinstance(x, SocialMechanism):
        return {"set": "S", "id": x.id, "kind": x.kind, "capabilities": sorted(x.capabilities)}
    if isinstance(x, DataUnit):
        return {"set": "D", "id": x.id, **unit_to_json(x)}
    raise TypeError(f"not a decomposable element: {x!r}")


def element_from_json(doc: dict[str, Any]) -> Any:
    kind = doc["set"]
    if kind == "O":
        return Organization(doc["id"], frozenset(doc["roles"]), frozenset(doc.get("credentials", ())))
    if kind == "M":
        return DataProvisionMechanism(doc["id"], doc.get("kind", "other"), frozenset(doc.get("capabilities", ())))
    if kind == "S":
        return SocialMechanism(doc["id"], doc.get("kind", "identity-verification"),
                               frozenset(doc.get("capabilities", ())))
    if kind == "D":
        return unit_from_json(doc["id"], doc)
    raise ValueError(f"unknown element set {kind!r}")


def to_doc(state: DataSpaceState) -> dict[str, Any]:
    return {
        "version": FORMAT_VERSION,
        "clock": state.clock,
        "orgs": {k: {"roles": sorted(o.roles), "credentials": sorted(o.credentials)} for k, o in state.orgs.items()},
        "mechanisms": {k: {"kind": m.kind, "capabilities": sorted(m.capabilities)}
                       for k, m in state.mechanisms.items()},
        "socials": {k: {"kind": s.kind, "capabilities": sorted(s.capabilities)} for k, s in state.socials.items()},
        "data": {k: unit_to_json(d) for k, d in state.data.items()},
        "rules": {k: rule_to_json(r) for k, r in state.rules.items()},
        "provider_of": dict(state.provider_of),
        "issuer_of": dict(state.issuer_of),
        "lifecycle": {k: AutomatonState(v).value for k, v in state.lifecycle.items()},
        "provision_conditions": {k: c.to_json() for k, c in state.provision_conditions.items()},
        "uses": sorted([a, d, n] for (a, d), n in state.uses.items()),
    }


def from_doc(doc: dict[str, Any]) -> DataSpaceState:
    if doc.get("version") != FORMAT_VERSION:
        raise CorruptSnapshot(f"unsupported snapshot version {doc.get('version')!r}")
    clock = doc["clock"]
    if not isinstance(clock, int) or isinstance(clock, bool):
        raise CorruptSnapshot("clock must be an integer")
    return DataSpaceState(
        orgs={k: Organization(k, frozenset(v["roles"]), frozenset(v["credentials"])) for k, v in doc["orgs"].items()},
        mechanisms={k: DataProvisionMechanism(k, v["kind"], frozenset(v["capabilities"]))
                    for k, v in doc["mechanisms"].items()},
        socials={k: SocialMechanism(k, v["kind"], frozenset(v["capabilities"])) for k, v in doc["socials"].items()},
        data={k: unit_from_json(k, v) for k, v in doc["data"].items()},
        rules={k: rule_from_json(k, v) for k, v in doc["rules"].items()},
        provider_of=dict(doc["provider_of"]),
        issuer_of=dict(doc["issuer_of"]),
        clock=clock,
        lifecycle={k: AutomatonState(v) for k, v in doc["lifecycle"].items()},
        provision_conditions={k: Condition.from_json(v) for k, v in doc["provision_conditions"].items()},
        uses={(a, d): int(n) for a, d, n in doc["uses"]},
    )


def snapshot(state: DataSpaceState) -> str:
    return dumps(to_doc(state))


def restore(document: str) -> DataSpaceState:
    try:
        doc = json.loads(document)
        if not isinstance(doc, dict):
            raise CorruptSnapshot("snapshot must be a JSON object")
        return from_doc(doc)
    except CorruptSnapshot:
        raise
    except (ValueError, KeyError, TypeError, AttributeError) as exc:
        raise CorruptSnapshot(f"corrupt snapshot: {exc}") from exc


def state_hash(state: DataSpaceState) -> str:
    return hashlib.sha256(snapshot(state).encode("ascii")).hexdigest()
