"""Line-oriented scenario files: parsing and deterministic replay.

One declaration, step or assertion per line::

    social s1 kind=identity-verification
    mech m1 kind=api-endpoint caps=[api]
    org o1 roles=[provider] creds=[s1]
    org o2 roles=[user] creds=[s1]
    Provide_Data(o1, data{id=d1; social=s1; mechs=[m1]; payload="hello"}, cond{purposes=[analytics]}) expect 1
    Provide_Rule(o1, rule{id=r1; issuer=o1; on=Use_Data; data=d1; actor=*; guard=cond{}; effect=permit; social=s1}) expect 1
    Use_Data(o2, d1, cond{}, analytics) expect 1
    assert lifecycle d1 = q_f

``peer org``/``peer social`` lines declare a second, static space and
``recognize <social> <peer-social>`` links the two, for ``assert interop``.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field
from typing import Any, Optional

from ..automaton import AutomatonState
from ..calls import OpCall, apply
from ..conditions import Condition, condition_from_record
from ..federation import FederationBridge, PremiseViolation, check_interoperability, establish_recognition
from ..model import (
    DataProvisionMechanism,
    DataSpaceState,
    DataUnit,
    Effect,
    Header,
    OpKind,
    Organization,
    Payload,
    Role,
    Rule,
    Selector,
    SocialMechanism,
    new_data_space,
    validate_state,
)
from ..syntax import WILDCARD, Call, Name, Parser, Record, ScenarioSyntaxError
from .snapshot import state_hash
from .trace import TraceEvent, validate_trace

__all__ = [
    "Scenario",
    "Step",
    "Assertion",
    "AssertionReport",
    "ScenarioRun",
    "parse_scenario",
    "run_scenario",
    "OP_NAMES",
]

OP_NAMES = tuple(k.value for k in OpKind)
_SETS = ("O", "M", "D", "S", "R")


@dataclass(frozen=True)
class Step:
    index: int
    call: OpCall
    expect: Optional[int] = None
    line: int = 0


@dataclass(frozen=True)
class Assertion:
    kind: str
    args: tuple
    line: int
    text: str


@dataclass
class Scenario:
    orgs: list[Organization] = field(default_factory=list)
    mechanisms: list[DataProvisionMechanism] = field(default_factory=list)
    socials: list[SocialMechanism] = field(default_factory=list)
    peer_orgs: list[Organization] = field(default_factory=list)
    peer_socials: list[SocialMechanism] = field(default_factory=list)
    recognitions: list[tuple[str, str]] = field(default_factory=list)
    steps: list[Step] = field(default_factory=list)
    assertions: list[Assertion] = field(default_factory=list)
    base: Optional[DataSpaceState] = None

    def initial_state(self) -> DataSpaceState:
        state = new_data_space(self.orgs, self.mechanisms, self.socials)
        if self.base is None:
            return state
        return self.base.evolve(
            orgs={**self.base.orgs, **state.orgs},
            mechanisms={**self.base.mechanisms, **state.mechanisms},
            socials={**self.base.socials, **state.socials},
        )

    def bridge(self, state: DataSpaceState) -> FederationBridge:
        peer = new_data_space(self.peer_orgs, (), self.peer_socials)
        bridge = FederationBridge(state, peer)
        for a, b in self.recognitions:
            bridge = establish_recognition(bridge, a, b)
        return bridge

    @property
    def calls(self) -> list[OpCall]:
        return [s.call for s in self.steps]


# -- parsing --------------------------------------------------------------


class _Ctx:
    def __init__(self, base: Optional[DataSpaceState]):
        self.orgs: set[str] = set(base.orgs) if base else set()
        self.socials: set[str] = set(base.socials) if base else set()
        self.mechs: set[str] = set(base.mechanisms) if base else set()
        self.peer_orgs: set[str] = set()
        self.peer_socials: set[str] = set()


def _ident(p: Parser, value: Any, what: str, col: int) -> str:
    if not isinstance(value, Name):
        raise p.error(f"{what} must be an identifier", expected="identifier", col=col)
    return str(value)


def _idlist(p: Parser, value: Any, what: str, col: int) -> list[str]:
    if isinstance(value, Name):
        return [str(value)]
    if isinstance(value, list) and all(isinstance(v, Name) for v in value):
        return [str(v) for v in value]
    raise p.error(f"{what} must be an identifier list", expected="[id, ...]", col=col)


def _decl_fields(p: Parser) -> dict[str, tuple[Any, int]]:
    out: dict[str, tuple[Any, int]] = {}
    while not p.at_end():
        col = p.tok.col
        key = p.name()
        p.expect("=")
        out[str(key)] = (p.value(), col)
    return out


def _declaration(p: Parser, head: str, ctx: _Ctx, sc: Scenario, peer: bool) -> None:
    id_col = p.tok.col
    ident = str(p.name())
    fields = _decl_fields(p)
    known = {"org": ("roles", "creds"), "mech": ("kind", "caps"), "social": ("kind", "caps")}[head]
    for key, (_, col) in fields.items():
        if key not in known:
            raise p.error(f"unknown {head} field {key!r}", expected=" or ".join(known), col=col)
    if head == "org":
        roles = _idlist(p, fields["roles"][0], "roles", fields["roles"][1]) if "roles" in fields else \
            [Role.PROVIDER.value, Role.USER.value]
        creds = _idlist(p, fields["creds"][0], "creds", fields["creds"][1]) if "creds" in fields else []
        socials = ctx.peer_socials if peer else ctx.socials
        for c in creds:
            if c not in socials:
                raise p.error(f"credential {c!r} references an undeclared social mechanism",
                              expected="a declared social", col=fields["creds"][1])
        try:
            org = Organization(ident, frozenset(roles), frozenset(creds))
        except ValueError as exc:
            raise p.error(str(exc), col=id_col) from None
        (sc.peer_orgs if peer else sc.orgs).append(org)
        (ctx.peer_orgs if peer else ctx.orgs).add(ident)
        return
    kind = _ident(p, fields["kind"][0], "kind", fields["kind"][1]) if "kind" in fields else None
    caps = frozenset(_idlist(p, fields["caps"][0], "caps", fields["caps"][1])) if "caps" in fields else frozenset()
    if head == "mech":
        if peer:
            raise p.error("peer spaces declare only orgs and socials", col=id_col)
        sc.mechanisms.append(DataProvisionMechanism(ident, kind or "other", caps))
        ctx.mechs.add(ident)
    else:
        sm = SocialMechanism(ident, kind or "identity-verification", caps)
        (sc.peer_socials if peer else sc.socials).append(sm)
        (ctx.peer_socials if peer else ctx.socials).add(ident)


_DATA_KEYS = {"id", "social", "mechs", "payload", "structured"}


def _unit(p: Parser, rec: Any, col: int) -> tuple[DataUnit, bool]:
    if not isinstance(rec, Record) or rec.tag != "data":
        raise p.error("expected a data unit", expected="data{...}", col=col)
    f = rec.fields
    pos = lambda k: rec.positions.get(k, rec.col)  # noqa: E731
    if "id" not in f:
        raise p.error("data unit needs an id", expected="id=...", col=rec.col)
    did = _ident(p, f["id"], "id", pos("id"))
    attrs: dict[str, Any] = {}
    if "social" in f:
        attrs["social"] = _ident(p, f["social"], "social", pos("social"))
    for key, value in f.items():
        if key in _DATA_KEYS:
            continue
        if key == "timestamp":
            try:
                attrs[key] = dt.datetime.fromisoformat(str(value).replace("Z", "+00:00"))
            except ValueError:
                raise p.error("bad timestamp", expected="ISO-8601 timestamp", col=pos(key)) from None
        elif isinstance(value, list):
            attrs[key] = frozenset(str(v) for v in value)
        elif isinstance(value, (str, int)):
            attrs[key] = value if isinstance(value, int) else str(value)
        else:
            raise p.error(f"unsupported attribute value for {key!r}", col=pos(key))
    mechs = _idlist(p, f["mechs"], "mechs", pos("mechs")) if "mechs" in f else []
    structured = False
    if "structured" in f:
        flag = _ident(p, f["structured"], "structured", pos("structured"))
        if flag not in ("true", "false"):
            raise p.error("structured takes true or false", expected="true|false", col=pos("structured"))
        structured = flag == "true"
    keep = "payload" not in f
    content = str(f.get("payload", ""))
    unit = DataUnit(did, Header(attrs), Payload.from_bytes(content, structured), frozenset(mechs))
    return unit, keep


def _selector_field(p: Parser, value: Any, what: str, col: int) -> Optional[list[str]]:
    if value is WILDCARD:
        return None
    return _idlist(p, value, what, col)


_RULE_KEYS = ("id", "issuer", "on", "data", "actor", "guard", "effect", "social")


def _rule(p: Parser, rec: Any, col: int, actor: str, ctx: _Ctx) -> Rule:
    if not isinstance(rec, Record) or rec.tag != "rule":
        raise p.error("expected a rule", expected="rule{...}", col=col)
    f = rec.fields
    pos = lambda k: rec.positions.get(k, rec.col)  # noqa: E731
    for key in f:
        if key not in _RULE_KEYS:
            raise p.error(f"unknown rule field {key!r}", expected=", ".join(_RULE_KEYS), col=pos(key))
    for key in ("id", "on", "effect", "social"):
        if key not in f:
            raise p.error(f"rule needs {key}", expected=f"{key}=...", col=rec.col)
    rid = _ident(p, f["id"], "id", pos("id"))
    issuer = _ident(p, f["issuer"], "issuer", pos("issuer")) if "issuer" in f else actor
    if issuer not in ctx.orgs:
        raise p.error(f"undeclared organization {issuer!r}", expected="a declared org", col=pos("issuer"))
    ops = []
    for name in _idlist(p, f["on"], "on", pos("on")):
        if name not in OP_NAMES:
            raise p.error(f"unknown operation {name!r}", expected="one of " + ", ".join(OP_NAMES), col=pos("on"))
        ops.append(OpKind(name))
    data = _selector_field(p, f.get("data", WILDCARD), "data", pos("data"))
    actors = _selector_field(p, f.get("actor", WILDCARD), "actor", pos("actor"))
    if actors is not None and len(actors) != 1:
        raise p.error("actor filter takes a single org or *", col=pos("actor"))
    if actors and actors[0] not in ctx.orgs:
        raise p.error(f"undeclared organization {actors[0]!r}", expected="a declared org", col=pos("actor"))
    guard = Condition()
    if "guard" in f:
        if not isinstance(f["guard"], Record):
            raise p.error("guard must be a condition", expected="cond{...}", col=pos("guard"))
        guard = condition_from_record(f["guard"], p.line)
    effect = _ident(p, f["effect"], "effect", pos("effect"))
    if effect not in ("permit", "deny"):
        raise p.error(f"unknown effect {effect!r}", expected="permit|deny", col=pos("effect"))
    social = _ident(p, f["social"], "social", pos("social"))
    return Rule(rid, issuer, Selector(frozenset(ops), frozenset(data) if data is not None else None,
                                      actors[0] if actors else None),
                guard, Effect(effect), social)


def _cond(p: Parser, value: Any, col: int) -> Condition:
    if not isinstance(value, Record):
        raise p.error("expected a condition", expected="cond{...}", col=col)
    try:
        return condition_from_record(value, p.line)
    except ScenarioSyntaxError:
        raise
    except (TypeError, ValueError) as exc:
        raise p.error(str(exc), col=col) from None


# (min args, max args) after the actor
_ARITY = {
    OpKind.PROVIDE_DATA: (1, 2),
    OpKind.MODIFY_DATA: (2, 3),
    OpKind.STOP_DATA: (1, 2),
    OpKind.USE_DATA: (1, 3),
    OpKind.PROVIDE_RULE: (1, 2),
    OpKind.MODIFY_RULE: (2, 3),
    OpKind.STOP_RULE: (1, 2),
}


def _step(p: Parser, call: Call, ctx: _Ctx) -> OpCall:
    if call.name not in OP_NAMES:
        raise p.error(f"unknown operation {call.name!r}", expected="one of " + ", ".join(OP_NAMES), col=call.col)
    kind = OpKind(call.name)
    args, cols = call.args, call.arg_cols
    lo, hi = _ARITY[kind]
    if not lo + 1 <= len(args) <= hi + 1:
        raise p.error(f"{kind.value} takes {lo + 1} to {hi + 1} arguments, got {len(args)}", col=call.col)
    actor = _ident(p, args[0], "actor", cols[0])
    if actor not in ctx.orgs:
        raise p.error(f"undeclared organization {actor!r}", expected="a declared org", col=cols[0])
    rest, rcols = args[1:], cols[1:]
    if kind is OpKind.PROVIDE_DATA:
        unit, _ = _unit(p, rest[0], rcols[0])
        cond = _cond(p, rest[1], rcols[1]) if len(rest) > 1 else Condition()
        return OpCall.provide_data(actor, unit, cond)
    if kind is OpKind.MODIFY_DATA:
        target = _ident(p, rest[0], "data id", rcols[0])
        unit, keep = _unit(p, rest[1], rcols[1])
        cond = _cond(p, rest[2], rcols[2]) if len(rest) > 2 else Condition()
        return OpCall.modify_data(actor, target, unit, cond, keep_payload=keep)
    if kind in (OpKind.STOP_DATA, OpKind.STOP_RULE):
        target = _ident(p, rest[0], "id", rcols[0])
        cond = _cond(p, rest[1], rcols[1]) if len(rest) > 1 else Condition()
        return OpCall(kind, actor, target, cond)
    if kind is OpKind.USE_DATA:
        target = _ident(p, rest[0], "data id", rcols[0])
        cond = _cond(p, rest[1], rcols[1]) if len(rest) > 1 else Condition()
        purpose = _ident(p, rest[2], "purpose", rcols[2]) if len(rest) > 2 else None
        return OpCall.use_data(actor, target, cond, purpose)
    if kind is OpKind.PROVIDE_RULE:
        rule = _rule(p, rest[0], rcols[0], actor, ctx)
        cond = _cond(p, rest[1], rcols[1]) if len(rest) > 1 else Condition()
        return OpCall.provide_rule(actor, rule, cond)
    target = _ident(p, rest[0], "rule id", rcols[0])
    rule = _rule(p, rest[1], rcols[1], actor, ctx)
    cond = _cond(p, rest[2], rcols[2]) if len(rest) > 2 else Condition()
    return OpCall.modify_rule(actor, target, rule, cond)


def _assertion(p: Parser, lineno: int, text: str, ctx: _Ctx) -> Assertion:
    kind_col = p.tok.col
    kind = str(p.name())
    if kind == "valid":
        p.end()
        return Assertion(kind, (), lineno, text)
    if kind == "lifecycle":
        d = str(p.name())
        p.expect("=")
        q_col = p.tok.col
        q = str(p.name())
        if q not in {s.value for s in AutomatonState}:
            raise p.error(f"unknown automaton state {q!r}", expected="q0|q1|q2|q_f|q_mod|q_stop", col=q_col)
        p.end()
        return Assertion(kind, (d, AutomatonState(q)), lineno, text)
    if kind == "count":
        s_col = p.tok.col
        s = str(p.name())
        if s not in _SETS:
            raise p.error(f"unknown component set {s!r}", expected="O|M|D|S|R", col=s_col)
        p.expect("=")
        n = p.value()
        if not isinstance(n, int):
            raise p.error("count takes an integer", expected="integer")
        p.end()
        return Assertion(kind, (s, n), lineno, text)
    if kind == "verdict":
        d = str(p.name())
        p.expect("=")
        v_col = p.tok.col
        v = str(p.name())
        if v not in ("SUCCESS", "NOT-SUCCESS"):
            raise p.error(f"unknown verdict {v!r}", expected="SUCCESS|NOT-SUCCESS", col=v_col)
        p.end()
        return Assertion(kind, (d, v == "SUCCESS"), lineno, text)
    if kind == "interop":
        d = str(p.name())
        p.expect("=")
        v_col = p.tok.col
        v = str(p.name())
        if v not in ("yes", "no"):
            raise p.error(f"unknown interop verdict {v!r}", expected="yes|no", col=v_col)
        p.end()
        return Assertion(kind, (d, v == "yes"), lineno, text)
    if kind == "uses":
        o_col = p.tok.col
        o = str(p.name())
        if o not in ctx.orgs:
            raise p.error(f"undeclared organization {o!r}", expected="a declared org", col=o_col)
        d = str(p.name())
        p.expect("=")
        n = p.value()
        if not isinstance(n, int):
            raise p.error("uses takes an integer", expected="integer")
        p.end()
        return Assertion(kind, (o, d, n), lineno, text)
    raise p.error(f"unknown assertion {kind!r}", expected="valid|lifecycle|count|verdict|interop|uses", col=kind_col)


def parse_scenario(text: str, base: Optional[DataSpaceState] = None) -> Scenario:
    """Parse a scenario file. ``base`` supplies pre-declared participants."""
    sc = Scenario(base=base)
    ctx = _Ctx(base)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        p = Parser(raw, lineno)
        head_tok = p.tok
        head = str(p.name())
        if head in ("org", "mech", "social"):
            _declaration(p, head, ctx, sc, peer=False)
        elif head == "peer":
            sub_col = p.tok.col
            sub = str(p.name())
            if sub not in ("org", "social"):
                raise p.error(f"unknown peer declaration {sub!r}", expected="org|social", col=sub_col)
            _declaration(p, sub, ctx, sc, peer=True)
        elif head == "recognize":
            a_col = p.tok.col
            a = str(p.name())
            b_col = p.tok.col
            b = str(p.name())
            p.end()
            if a not in ctx.socials:
                raise p.error(f"undeclared social mechanism {a!r}", expected="a declared social", col=a_col)
            if b not in ctx.peer_socials:
                raise p.error(f"undeclared peer social mechanism {b!r}", expected="a declared peer social", col=b_col)
            sc.recognitions.append((a, b))
        elif head == "assert":
            sc.assertions.append(_assertion(p, lineno, line, ctx))
        elif p.at("("):
            p.i -= 1
            call = p.call()
            expect = None
            if not p.at_end():
                kw_col = p.tok.col
                if str(p.name()) != "expect":
                    raise p.error("unexpected trailing input", expected="expect 0|1", col=kw_col)
                val = p.value()
                if val not in (0, 1):
                    raise p.error("expect takes 0 or 1", expected="0|1")
            else:
                val = None
            expect = val
            p.end()
            sc.steps.append(Step(len(sc.steps), _step(p, call, ctx), expect, lineno))
        else:
            raise ScenarioSyntaxError(f"unknown statement {head!r}", lineno, head_tok.col,
                                      "org|mech|social|peer|recognize|assert or one of " + ", ".join(OP_NAMES))
    return sc


# -- replay ---------------------------------------------------------------


@dataclass(frozen=True)
class Check:
    line: int
    description: str
    passed: bool
    detail: str = ""

    def __str__(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"{mark} line {self.line}: {self.description}" + (f" ({self.detail})" if self.detail else "")


@dataclass
class AssertionReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def render(self) -> str:
        return "".join(str(c) + "\n" for c in self.checks)


@dataclass
class ScenarioRun:
    state: DataSpaceState
    trace: list[TraceEvent]
    report: AssertionReport

    def __iter__(self):
        return iter((self.state, self.trace, self.report))


def _evaluate(a: Assertion, sc: Scenario, state: DataSpaceState, trace: list[TraceEvent]) -> Check:
    if a.kind == "valid":
        violations = validate_state(state)
        return Check(a.line, a.text, not violations, "; ".join(map(str, violations)))
    if a.kind == "lifecycle":
        d, q = a.args
        got = state.lifecycle.get(d, AutomatonState.Q0)
        return Check(a.line, a.text, got is q, f"got {got.value}")
    if a.kind == "count":
        s, n = a.args
        got = len(getattr(state, s))
        return Check(a.line, a.text, got == n, f"got {got}")
    if a.kind == "verdict":
        d, want = a.args
        got = validate_trace(trace).verdicts.get(d, False)
        return Check(a.line, a.text, got == want, "got " + ("SUCCESS" if got else "NOT-SUCCESS"))
    if a.kind == "interop":
        d, want = a.args
        try:
            verdict = check_interoperability(sc.bridge(state), d)
        except PremiseViolation as exc:
            return Check(a.line, a.text, False, f"premise violation: {exc}")
        return Check(a.line, a.text, verdict.interoperable == want, verdict.render())
    o, d, n = a.args
    got = state.uses.get((o, d), 0)
    return Check(a.line, a.text, got == n, f"got {got}")


def run_scenario(sc: Scenario) -> ScenarioRun:
    """Execute every step in order, then check expectations and assertions."""
    state = sc.initial_state()
    trace: list[TraceEvent] = []
    report = AssertionReport()
    for s in sc.steps:
        clock = state.clock
        res = apply(state, s.call)
        state = res.state
        trace.append(TraceEvent(clock, s.call.kind, s.call.actor, s.call.target, res.ret, res.reason,
                                state_hash(state), res.affects))
        if s.expect is not None:
            report.checks.append(Check(
                s.line, f"step {s.index} {s.call} expect {s.expect}", res.ret == s.expect,
                f"got ret={res.ret} reason={res.reason.value}",
            ))
    for a in sc.assertions:
        report.checks.append(_evaluate(a, sc, state, trace))
    return ScenarioRun(state, trace, report)
