"""Hierarchical decomposition of space elements and the success-preservation check.

A decomposition replaces one element of O, M, D or S by children that must
jointly reconstruct it. Transactions written against the abstract space are
translated onto the refined space and both are executed; a decomposition is
constraint preserving over a suite when every scenario succeeds step-for-step
identically at both levels.

Translation rules:

* an operation on a decomposed data unit becomes the same operation on every
  child, and the refined step succeeds iff all of them do;
* Use_Data by a decomposed organization is performed by every child; the
  sovereignty-bearing operations go to the first child, which inherits
  provenance;
* references to a decomposed social mechanism move to its first child, except
  organization credentials, which receive all children;
* references to a decomposed mechanism are replaced by all of its children.

All child operations of one refined step share a single logical tick, so the
two levels stay clock-aligned. Next to the conjunctive translation, every
scenario also runs once per child of each decomposed data unit or
organization with only that child targeted, so a weakened child cannot hide
behind its siblings.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Mapping, Optional, Sequence, Union

from .calls import OpCall, apply
from .conditions import Condition
from .model import (
    DanglingReference,
    DataProvisionMechanism,
    DataSpaceState,
    DataUnit,
    Header,
    OpKind,
    Organization,
    Rule,
    Selector,
    SocialMechanism,
    validate_state,
)

__all__ = [
    "UnionViolation",
    "TranslationFailure",
    "ConditionPatch",
    "Decomposition",
    "DecompositionTree",
    "RefinedSpacePair",
    "SuiteScenario",
    "Counterexample",
    "PreservationReport",
    "decompose",
    "identity_pair",
    "union_violations",
    "translate_call",
    "default_suite",
    "check_constraint_preserving",
]

Element = Union[Organization, DataProvisionMechanism, DataUnit, SocialMechanism]


class UnionViolation(ValueError):
    def __init__(self, element: str, problems: Sequence[str]):
        super().__init__(f"children of {element!r} do not reconstruct it: " + "; ".join(problems))
        self.element = element
        self.problems = list(problems)


class TranslationFailure(ValueError):
    pass


@dataclass(frozen=True)
class ConditionPatch:
    """Edit applied to a parent's condition when it is handed to one child."""

    drop: frozenset[str] = frozenset()
    set: Condition = Condition()

    def apply(self, c: Condition) -> Condition:
        for clause in sorted(self.drop):
            c = c.without(clause)
        overrides = {k: v for k, v in vars(self.set).items() if v is not None}
        return replace(c, **overrides) if overrides else c

    def to_json(self) -> dict[str, Any]:
        return {"drop": sorted(self.drop), "set": self.set.to_json()}

    @classmethod
    def from_json(cls, doc: Mapping[str, Any]) -> "ConditionPatch":
        return cls(frozenset(doc.get("drop", ())), Condition.from_json(doc.get("set", {})))


def _set_of(x: Element) -> str:
    return {Organization: "O", DataProvisionMechanism: "M", DataUnit: "D", SocialMechanism: "S"}[type(x)]


def _lookup(state: DataSpaceState, element: str) -> tuple[str, Element]:
    for tag, table in (("D", state.data), ("M", state.mechanisms), ("S", state.socials), ("O", state.orgs)):
        if element in table:
            return tag, table[element]
    raise DanglingReference(element, "decomposition target")


@dataclass(frozen=True)
class DecompositionTree:
    root: str
    kind: str
    children: tuple["DecompositionTree", ...] = ()

    @property
    def is_atomic(self) -> bool:
        return not self.children

    def leaves(self) -> list[str]:
        if self.is_atomic:
            return [self.root]
        return [leaf for c in self.children for leaf in c.leaves()]


@dataclass(frozen=True)
class Decomposition:
    """One element replaced by its children."""

    kind: str
    parent: Element
    children: tuple[Element, ...]
    patches: Mapping[str, ConditionPatch] = field(default_factory=dict)

    @property
    def element(self) -> str:
        return self.parent.id

    @property
    def child_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.children)

    @property
    def representative(self) -> str:
        return self.children[0].id

    def tree(self) -> DecompositionTree:
        return DecompositionTree(self.element, self.kind,
                                 tuple(DecompositionTree(c, self.kind) for c in self.child_ids))

    # -- substitutions of references inside values ------------------------

    def cond(self, c: Condition) -> Condition:
        if self.kind == "S" and c.required_social == self.element:
            return replace(c, required_social=self.representative)
        if self.kind == "O" and c.allowed_orgs is not None and self.element in c.allowed_orgs:
            return replace(c, allowed_orgs=(c.allowed_orgs - {self.element}) | set(self.child_ids))
        return c

    def unit(self, u: DataUnit) -> DataUnit:
        if self.kind == "S" and u.header.social == self.element:
            return replace(u, header=u.header.with_attrs(social=self.representative))
        if self.kind == "M" and self.element in u.mechanisms:
            return replace(u, mechanisms=(u.mechanisms - {self.element}) | set(self.child_ids))
        return u

    def rule(self, r: Rule) -> Rule:
        sel = r.selector
        if self.kind == "D" and sel.data is not None and self.element in sel.data:
            sel = replace(sel, data=(sel.data - {self.element}) | set(self.child_ids))
        if self.kind == "O" and sel.actor == self.element:
            sel = replace(sel, actor=self.representative)
        issuer = self.representative if self.kind == "O" and r.issuer == self.element else r.issuer
        social = self.representative if self.kind == "S" and r.social == self.element else r.social
        return replace(r, issuer=issuer, selector=sel, social=social, guard=self.cond(r.guard))

    def org(self, o: Organization) -> Organization:
        if self.kind == "S" and self.element in o.credentials:
            return replace(o, credentials=(o.credentials - {self.element}) | set(self.child_ids))
        return o

    def child_cond(self, child: str, c: Condition) -> Condition:
        patch = self.patches.get(child)
        return patch.apply(c) if patch is not None else c

    # -- state ------------------------------------------------------------

    def refine_state(self, s: DataSpaceState) -> DataSpaceState:
        orgs = {k: self.org(v) for k, v in s.orgs.items()}
        mechs = dict(s.mechanisms)
        socials = dict(s.socials)
        data = {k: self.unit(v) for k, v in s.data.items()}
        rules = {k: self.rule(v) for k, v in s.rules.items()}
        provider_of = dict(s.provider_of)
        issuer_of = dict(s.issuer_of)
        conds = {k: self.cond(v) for k, v in s.provision_conditions.items()}
        lifecycle = dict(s.lifecycle)
        uses = dict(s.uses)
        e, kids = self.element, self.child_ids
        if self.kind == "O":
            del orgs[e]
            orgs.update({c.id: c for c in self.children})
            provider_of = {k: (self.representative if v == e else v) for k, v in provider_of.items()}
            issuer_of = {k: (self.representative if v == e else v) for k, v in issuer_of.items()}
            uses = {}
            for (a, d), n in s.uses.items():
                for actor in (kids if a == e else (a,)):
                    uses[(actor, d)] = n
        elif self.kind == "M":
            del mechs[e]
            mechs.update({c.id: c for c in self.children})
        elif self.kind == "S":
            del socials[e]
            socials.update({c.id: c for c in self.children})
        else:
            parent_cond = conds.pop(e, None)
            data.pop(e, None)
            provider = provider_of.pop(e, None)
            state_q = lifecycle.pop(e, None)
            for child in self.children:
                data[child.id] = child
                if provider is not None:
                    provider_of[child.id] = provider
                if parent_cond is not None:
                    conds[child.id] = self.child_cond(child.id, parent_cond)
                if state_q is not None:
                    lifecycle[child.id] = state_q
            uses = {}
            for (a, d), n in s.uses.items():
                for target in (kids if d == e else (d,)):
                    uses[(a, target)] = n
        return s.evolve(orgs=orgs, mechanisms=mechs, socials=socials, data=data, rules=rules,
                        provider_of=provider_of, issuer_of=issuer_of, provision_conditions=conds,
                        lifecycle=lifecycle, uses=uses)

    # -- calls ------------------------------------------------------------

    def translate(self, call: OpCall, only: Optional[str] = None) -> list[OpCall]:
        """Refine one call. ``only`` restricts fan-out to a single child."""
        kids = (only,) if only is not None else self.child_ids
        call = replace(
            call,
            cond=self.cond(call.cond),
            unit=self.unit(call.unit) if call.unit is not None else None,
            rule=self.rule(call.rule) if call.rule is not None else None,
        )
        if self.kind == "O" and call.actor == self.element:
            if call.kind is OpKind.USE_DATA:
                return [replace(call, actor=k) for k in kids]
            return [replace(call, actor=self.representative)]
        if self.kind == "D" and call.target == self.element and not call.kind.is_governance:
            by_id = {c.id: c for c in self.children}
            out = []
            for k in kids:
                child = by_id[k]
                if call.kind is OpKind.PROVIDE_DATA:
                    out.append(replace(call, target=k, unit=child, cond=self.child_cond(k, call.cond)))
                elif call.kind is OpKind.MODIFY_DATA:
                    attrs = {a: v for a, v in call.unit.header.pairs if a != "social"}
                    if child.header.social is not None:
                        attrs["social"] = child.header.social
                    unit = replace(child, header=Header(attrs))
                    out.append(replace(call, target=k, unit=unit, keep_payload=True,
                                       cond=self.child_cond(k, call.cond)))
                else:
                    out.append(replace(call, target=k))
            return out
        return [call]


def union_violations(d: Decomposition) -> list[str]:
    """How the children fail to reconstruct the parent (empty when they do)."""
    problems: list[str] = []
    kids = d.children
    if not kids:
        return ["no children"]
    ids = [c.id for c in kids]
    if len(set(ids)) != len(ids):
        problems.append("duplicate child ids")
    if d.kind == "D":
        parent = d.parent
        social = parent.header.social
        for c in kids:
            if c.header.social is None:
                problems.append(f"{c.id} lacks the mandatory social attribute")
            elif c.header.social != social:
                problems.append(f"{c.id} social {c.header.social} differs from parent {social}")
        if any(c.payload.inline is None for c in kids):
            problems.append("child payloads must carry inline content")
        else:
            joined = b"".join(c.payload.inline for c in kids)
            if hashlib.sha256(joined).hexdigest() != parent.payload.content_hash:
                problems.append("child payloads do not partition the parent content")
        mechs = frozenset().union(*(c.mechanisms for c in kids))
        if mechs != parent.mechanisms:
            problems.append(f"child mechanisms {sorted(mechs)} != parent {sorted(parent.mechanisms)}")
    else:
        caps = frozenset().union(*(c.capabilities for c in kids))
        if caps != d.parent.capabilities:
            lost = sorted(d.parent.capabilities - caps)
            extra = sorted(caps - d.parent.capabilities)
            problems.append(f"capability covering broken (lost {lost}, extra {extra})")
        if d.kind == "O":
            creds = frozenset().union(*(c.credentials for c in kids))
            if creds != d.parent.credentials:
                problems.append("child credentials do not cover the parent's")
    for c in kids:
        if _set_of(c) != d.kind:
            problems.append(f"{c.id} is not a member of {d.kind}")
    return problems


@dataclass(frozen=True)
class RefinedSpacePair:
    abstract_space: DataSpaceState
    decompositions: tuple[Decomposition, ...] = ()

    @property
    def refined_space(self) -> DataSpaceState:
        s = self.abstract_space
        for d in self.decompositions:
            s = d.refine_state(s)
        return s

    @property
    def mapping(self) -> dict[str, frozenset[str]]:
        """abstract id -> refined ids; undecomposed elements map to themselves."""
        a = self.abstract_space
        out = {x: frozenset({x}) for x in (*a.orgs, *a.mechanisms, *a.data, *a.socials)}
        for d in self.decompositions:
            out[d.element] = frozenset(d.child_ids)
        return out

    @property
    def trees(self) -> list[DecompositionTree]:
        return [d.tree() for d in self.decompositions]

    def decompose(self, element: str, children: Sequence[Element],
                  patches: Optional[Mapping[str, ConditionPatch]] = None, *, check: bool = True) -> "RefinedSpacePair":
        if any(d.element == element for d in self.decompositions):
            raise ValueError(f"{element!r} is already decomposed")
        kind, parent = _lookup(self.abstract_space, element)
        dec = Decomposition(kind, parent, tuple(children), dict(patches or {}))
        taken = set(self.refined_space.orgs) | set(self.refined_space.mechanisms) | \
            set(self.refined_space.socials) | set(self.refined_space.provider_of)
        clash = sorted(set(dec.child_ids) & (taken - {element}))
        if clash:
            raise ValueError(f"child ids already in use: {clash}")
        for cid in (patches or {}):
            if cid not in dec.child_ids:
                raise DanglingReference(cid, f"patches of {element}")
        pair = RefinedSpacePair(self.abstract_space, self.decompositions + (dec,))
        if check:
            problems = union_violations(dec)
            if problems:
                raise UnionViolation(element, problems)
            for v in validate_state(pair.refined_space):
                if v.kind == "DanglingReference":
                    raise DanglingReference(v.detail.split()[-1], v.subject)
        return pair


def identity_pair(state: DataSpaceState) -> RefinedSpacePair:
    return RefinedSpacePair(state)


def decompose(state: Union[DataSpaceState, RefinedSpacePair], element: str, children: Sequence[Element],
              patches: Optional[Mapping[str, ConditionPatch]] = None, *, check: bool = True) -> RefinedSpacePair:
    """Replace ``element`` by ``children``.

    With ``check`` the union property is enforced (``UnionViolation``) and
    every reference must resolve (``DanglingReference``). ``patches`` edit
    the inherited provision condition per child.
    """
    pair = state if isinstance(state, RefinedSpacePair) else identity_pair(state)
    return pair.decompose(element, children, patches, check=check)


def translate_call(pair: RefinedSpacePair, call: OpCall, only: Optional[tuple[str, str]] = None) -> list[OpCall]:
    """Refine ``call`` through every decomposition. ``only=(element, child)`` projects."""
    calls = [call]
    for d in pair.decompositions:
        child = only[1] if only is not None and only[0] == d.element else None
        calls = [c for x in calls for c in d.translate(x, child)]
    if not calls:
        raise TranslationFailure(f"no refined operations for {call}")
    return calls


# -- suites and the check -------------------------------------------------


@dataclass(frozen=True)
class SuiteScenario:
    name: str
    family: str
    calls: tuple[OpCall, ...]


PROBE_ACTOR = "~probe"


def default_suite(pair: RefinedSpacePair, horizon_cap: int = 64) -> list[SuiteScenario]:
    """Scenario families for the three preservation criteria.

    ``capability``: each org using each unit under each purpose, then after a
    no-op modification, a stop and each rule's withdrawal. ``security``:
    social-requirement and org-restricted uses, repeated uses past any use
    limit, and non-provider modify/stop attempts. ``context``: a single use
    at every logical time up to just past the validity window, the clock
    advanced by attempts of an unknown actor.
    """
    a = pair.abstract_space
    out: list[SuiteScenario] = []
    orgs = sorted(a.orgs)
    for d in sorted(a.data):
        unit = a.data[d]
        provider = a.provider_of[d]
        cond = a.provision_conditions.get(d, Condition())
        purposes: list[Optional[str]] = [None, *sorted(cond.purposes or ()), "~unlisted"]
        noop = OpCall.modify_data(provider, d, unit, cond, keep_payload=True)
        for o in orgs:
            for p in purposes:
                out.append(SuiteScenario(f"use/{d}/{o}/{p}", "capability", (OpCall.use_data(o, d, Condition(), p),)))
        out.append(SuiteScenario(f"modify-then-use/{d}", "capability",
                                 (noop, *(OpCall.use_data(o, d) for o in orgs))))
        out.append(SuiteScenario(f"stop-then-use/{d}", "capability",
                                 (OpCall.stop_data(provider, d), *(OpCall.use_data(o, d) for o in orgs))))
        for rid in sorted(a.rules):
            issuer = a.issuer_of[rid]
            out.append(SuiteScenario(f"stop-rule-then-use/{d}/{rid}", "capability",
                                     (OpCall.stop_rule(issuer, rid), *(OpCall.use_data(o, d) for o in orgs))))
        first = purposes[1] if len(purposes) > 2 else None
        repeats = (cond.max_uses or 1) + 1
        for o in orgs:
            if unit.header.social is not None:
                out.append(SuiteScenario(f"use-requiring-social/{d}/{o}", "security",
                                         (OpCall.use_data(o, d, Condition(required_social=unit.header.social), first),)))
            out.append(SuiteScenario(f"use-restricted/{d}/{o}", "security",
                                     (OpCall.use_data(o, d, Condition(allowed_orgs={o}), first),)))
            out.append(SuiteScenario(f"repeat-use/{d}/{o}", "security",
                                     tuple(OpCall.use_data(o, d, Condition(), first) for _ in range(repeats))))
            if o != provider:
                out.append(SuiteScenario(f"foreign-modify/{d}/{o}", "security",
                                         (OpCall.modify_data(o, d, unit, cond, keep_payload=True),)))
                out.append(SuiteScenario(f"foreign-stop/{d}/{o}", "security", (OpCall.stop_data(o, d),)))
        end = cond.valid_window[1] if cond.valid_window else a.clock
        horizon = min(max(end - a.clock + 2, 1), horizon_cap)
        for o in orgs:
            for t in range(horizon + 1):
                probes = tuple(OpCall.use_data(PROBE_ACTOR, d) for _ in range(t))
                out.append(SuiteScenario(f"use-at/{d}/{o}/+{t}", "context",
                                         probes + (OpCall.use_data(o, d, Condition(), first),)))
    return out


@dataclass(frozen=True)
class Counterexample:
    scenario: str
    variant: str
    step: int
    detail: str
    abstract_trace: tuple[str, ...] = ()
    refined_trace: tuple[str, ...] = ()

    def to_json(self) -> dict[str, Any]:
        return {
            "scenario": self.scenario,
            "variant": self.variant,
            "step": self.step,
            "detail": self.detail,
            "abstract_trace": list(self.abstract_trace),
            "refined_trace": list(self.refined_trace),
        }


@dataclass
class PreservationReport:
    preserving: bool
    counterexamples: list[Counterexample] = field(default_factory=list)
    scenarios_checked: int = 0

    def to_json(self) -> dict[str, Any]:
        return {
            "preserving": self.preserving,
            "scenarios_checked": self.scenarios_checked,
            "counterexamples": [c.to_json() for c in self.counterexamples],
        }

    def render(self) -> str:
        from .harness.snapshot import dumps

        return dumps(self.to_json())


def _variants(pair: RefinedSpacePair) -> list[tuple[str, Optional[tuple[str, str]]]]:
    out: list[tuple[str, Optional[tuple[str, str]]]] = [("all", None)]
    for d in pair.decompositions:
        if d.kind in ("D", "O") and len(d.children) > 1:
            out.extend((f"only:{c}", (d.element, c)) for c in d.child_ids)
    return out


def _run_abstract(state: DataSpaceState, calls: Iterable[OpCall]) -> tuple[list[int], list[str]]:
    rets, lines = [], []
    for c in calls:
        res = apply(state, c)
        state = res.state
        rets.append(res.ret)
        lines.append(f"{c} ret={res.ret} reason={res.reason.value}")
    return rets, lines


def _run_refined(pair: RefinedSpacePair, state: DataSpaceState, calls: Iterable[OpCall],
                 only: Optional[tuple[str, str]]) -> tuple[list[int], list[str]]:
    rets, lines = [], []
    for c in calls:
        t = state.clock
        ok = 1
        parts = []
        for child in translate_call(pair, c, only):
            res = apply(state.evolve(clock=t), child)
            state = res.state
            ok &= res.ret
            parts.append(f"{child} ret={res.ret} reason={res.reason.value}")
        state = state.evolve(clock=t + 1)
        rets.append(ok)
        lines.append(f"{c} ret={ok} [" + "; ".join(parts) + "]")
    return rets, lines


def check_constraint_preserving(pair: RefinedSpacePair,
                                suite: Optional[Sequence[SuiteScenario]] = None) -> PreservationReport:
    """Compare step-wise success at both levels over ``suite`` (default: :func:`default_suite`).

    Union-property failures and structural problems of the refined space are
    reported as counterexamples of the ``structure`` variant.
    """
    if suite is None:
        suite = default_suite(pair)
    counter: list[Counterexample] = []
    for d in pair.decompositions:
        for problem in union_violations(d):
            counter.append(Counterexample(f"union/{d.element}", "structure", -1, problem))
    refined = pair.refined_space
    for v in validate_state(refined):
        counter.append(Counterexample(f"validate/{v.subject}", "structure", -1, str(v)))
    variants = _variants(pair)
    for sc in suite:
        a_rets, a_lines = _run_abstract(pair.abstract_space, sc.calls)
        for vname, only in variants:
            r_rets, r_lines = _run_refined(pair, refined, sc.calls, only)
            if r_rets != a_rets:
                step = next(i for i, (x, y) in enumerate(zip(a_rets, r_rets)) if x != y)
                counter.append(Counterexample(
                    sc.name, vname, step,
                    f"{sc.family}: abstract ret={a_rets[step]} refined ret={r_rets[step]} at step {step}",
                    tuple(a_lines), tuple(r_lines),
                ))
    return PreservationReport(not counter, counter, len(suite))
