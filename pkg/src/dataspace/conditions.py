"""Clause-set conditions and the provider/user compatibility test.

A :class:`Condition` is a conjunction of optional clauses. An omitted clause
is a wildcard, so ``Condition()`` admits everything and sits at the top of
the constraint lattice.

>>> ctx = RequestContext(actor="o2", clock=3)
>>> satisfies(Condition(valid_window=(3, 7)), ctx)
True
>>> compatible(Condition(purposes={"analytics"}),
...            Condition(purposes={"analytics", "resale"}), ctx)
False
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Optional

from .syntax import Name, Record, ScenarioSyntaxError, parse_value

__all__ = [
    "Condition",
    "RequestContext",
    "WILDCARD_CONDITION",
    "satisfies",
    "compatible",
    "clause_names",
    "parse_condition",
    "condition_from_record",
    "format_condition",
]

CLAUSES = ("orgs", "purposes", "window", "social", "max_uses")


def _frozen(items: Optional[Iterable[str]]) -> Optional[frozenset[str]]:
    if items is None:
        return None
    if isinstance(items, str):
        raise TypeError("expected a collection of tags, got a bare string")
    return frozenset(items)


@dataclass(frozen=True)
class Condition:
    """Provision or usage condition; ``None`` fields are wildcards."""

    allowed_orgs: Optional[frozenset[str]] = None
    purposes: Optional[frozenset[str]] = None
    valid_window: Optional[tuple[int, int]] = None
    required_social: Optional[str] = None
    max_uses: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "allowed_orgs", _frozen(self.allowed_orgs))
        object.__setattr__(self, "purposes", _frozen(self.purposes))
        if self.valid_window is not None:
            start, end = (int(x) for x in self.valid_window)
            if start > end:
                raise ValueError(f"valid_window start {start} > end {end}")
            object.__setattr__(self, "valid_window", (start, end))
        if self.max_uses is not None and (not isinstance(self.max_uses, int) or self.max_uses < 1):
            raise ValueError(f"max_uses must be a positive integer, got {self.max_uses!r}")

    @property
    def is_wildcard(self) -> bool:
        return not clause_names(self)

    def without(self, clause: str) -> "Condition":
        """Copy of this condition with one clause dropped (set to wildcard)."""
        attr = _ATTR[clause]
        kw = {a: getattr(self, a) for a in _ATTR.values()}
        kw[attr] = None
        return Condition(**kw)

    def only(self, clause: str) -> "Condition":
        """Copy keeping a single clause."""
        attr = _ATTR[clause]
        return Condition(**{attr: getattr(self, attr)})

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        if self.allowed_orgs is not None:
            out["orgs"] = sorted(self.allowed_orgs)
        if self.purposes is not None:
            out["purposes"] = sorted(self.purposes)
        if self.valid_window is not None:
            out["window"] = list(self.valid_window)
        if self.required_social is not None:
            out["social"] = self.required_social
        if self.max_uses is not None:
            out["max_uses"] = self.max_uses
        return out

    @classmethod
    def from_json(cls, doc: dict[str, Any]) -> "Condition":
        unknown = set(doc) - set(CLAUSES)
        if unknown:
            raise ValueError(f"unknown clause(s) {sorted(unknown)}")
        window = doc.get("window")
        return cls(
            allowed_orgs=doc.get("orgs"),
            purposes=doc.get("purposes"),
            valid_window=tuple(window) if window is not None else None,
            required_social=doc.get("social"),
            max_uses=doc.get("max_uses"),
        )

    def __str__(self) -> str:
        return format_condition(self)


_ATTR = {
    "orgs": "allowed_orgs",
    "purposes": "purposes",
    "window": "valid_window",
    "social": "required_social",
    "max_uses": "max_uses",
}

WILDCARD_CONDITION = Condition()


def clause_names(c: Condition) -> list[str]:
    return [name for name, attr in _ATTR.items() if getattr(c, attr) is not None]


@dataclass(frozen=True)
class RequestContext:
    """Facts about one attempted operation.

    ``purpose``, ``data_social`` and ``provider_credentials`` extend the
    basic context so that usage-side clauses can be discharged.
    """

    actor: str
    clock: int
    actor_credentials: frozenset[str] = frozenset()
    uses_so_far: int = 0
    purpose: Optional[str] = None
    data_social: Optional[str] = None
    provider_credentials: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.uses_so_far < 0:
            raise ValueError("uses_so_far must be non-negative")
        object.__setattr__(self, "actor_credentials", frozenset(self.actor_credentials))
        object.__setattr__(self, "provider_credentials", frozenset(self.provider_credentials))


def satisfies(c: Condition, ctx: RequestContext) -> bool:
    """True iff every clause present in ``c`` holds in ``ctx``."""
    if c.allowed_orgs is not None and ctx.actor not in c.allowed_orgs:
        return False
    if c.purposes is not None and ctx.purpose is not None and ctx.purpose not in c.purposes:
        return False
    if c.valid_window is not None:
        start, end = c.valid_window
        if not start <= ctx.clock <= end:
            return False
    if c.required_social is not None and c.required_social not in ctx.actor_credentials:
        return False
    if c.max_uses is not None and ctx.uses_so_far >= c.max_uses:
        return False
    return True


def compatible(cond_p: Condition, cond_u: Condition, ctx: RequestContext) -> bool:
    """Directional compatibility of a provider condition with a usage condition.

    The provider's clauses must admit this use, and every clause the user
    states must be implied by the provider's clauses or by context facts.
    """
    if not satisfies(cond_p, ctx):
        return False
    if cond_u.purposes is not None and cond_p.purposes is not None:
        if not cond_u.purposes <= cond_p.purposes:
            return False
    if cond_u.valid_window is not None and cond_p.valid_window is not None:
        (us, ue), (ps, pe) = cond_u.valid_window, cond_p.valid_window
        if not (ps <= us and ue <= pe):
            return False
    if cond_u.allowed_orgs is not None and ctx.actor not in cond_u.allowed_orgs:
        return False
    if cond_u.required_social is not None:
        if cond_u.required_social != ctx.data_social and cond_u.required_social not in ctx.provider_credentials:
            return False
    if cond_u.max_uses is not None and cond_p.max_uses is not None:
        if cond_u.max_uses > cond_p.max_uses:
            return False
    return True


# -- textual form ---------------------------------------------------------


def _tags(value: Any, line: int, col: int, key: str) -> list[str]:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ScenarioSyntaxError(f"clause {key!r} takes a list of identifiers", line, col, "[id, ...]")
    return [str(v) for v in value]


def condition_from_record(rec: Record, line: int = 1) -> Condition:
    """Interpret a parsed ``cond{...}`` record. Unknown clauses are rejected."""
    if rec.tag != "cond":
        raise ScenarioSyntaxError(f"expected cond{{...}}, got {rec.tag}{{...}}", line, rec.col, "cond{...}")
    kw: dict[str, Any] = {}
    try:
        for key, value in rec.fields.items():
            col = rec.positions.get(key, rec.col)
            if key == "orgs":
                kw["allowed_orgs"] = _tags(value, line, col, key)
            elif key == "purposes":
                kw["purposes"] = _tags(value, line, col, key)
            elif key == "window":
                if not (isinstance(value, list) and len(value) == 2 and all(isinstance(v, int) for v in value)):
                    raise ScenarioSyntaxError("window takes [start, end]", line, col, "[int, int]")
                kw["valid_window"] = (value[0], value[1])
            elif key == "social":
                if not isinstance(value, Name):
                    raise ScenarioSyntaxError("social takes an identifier", line, col, "identifier")
                kw["required_social"] = str(value)
            elif key == "max_uses":
                if not isinstance(value, int):
                    raise ScenarioSyntaxError("max_uses takes an integer", line, col, "integer")
                kw["max_uses"] = value
            else:
                raise ScenarioSyntaxError(f"unknown clause {key!r}", line, col, "one of " + ", ".join(CLAUSES))
        return Condition(**kw)
    except ValueError as exc:
        raise ScenarioSyntaxError(str(exc), line, rec.col) from None


def parse_condition(text: str) -> Condition:
    """Parse ``cond{orgs=[o1]; purposes=[analytics]; window=[0,10]; social=s1; max_uses=3}``."""
    value = parse_value(text)
    if not isinstance(value, Record):
        raise ScenarioSyntaxError("expected cond{...}", expected="cond{...}")
    return condition_from_record(value)


def format_condition(c: Condition) -> str:
    parts = []
    if c.allowed_orgs is not None:
        parts.append("orgs=[" + ",".join(sorted(c.allowed_orgs)) + "]")
    if c.purposes is not None:
        parts.append("purposes=[" + ",".join(sorted(c.purposes)) + "]")
    if c.valid_window is not None:
        parts.append(f"window=[{c.valid_window[0]},{c.valid_window[1]}]")
    if c.required_social is not None:
        parts.append(f"social={c.required_social}")
    if c.max_uses is not None:
        parts.append(f"max_uses={c.max_uses}")
    return "cond{" + "; ".join(parts) + "}"
