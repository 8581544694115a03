"""Command-line entry point.

Exit codes: 0 when every assertion or verdict passes, 1 on a mismatch,
2 on unreadable or malformed input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .federation import FederationBridge, PremiseViolation, check_interoperability, establish_recognition
from .harness import (
    CorruptSnapshot,
    MalformedTrace,
    format_trace,
    parse_scenario,
    parse_trace,
    restore,
    run_scenario,
    snapshot,
    validate_trace,
)
from .model import DanglingReference, validate_state
from .refinement import (
    ConditionPatch,
    RefinedSpacePair,
    SuiteScenario,
    UnionViolation,
    check_constraint_preserving,
    identity_pair,
)
from .harness.snapshot import element_from_json
from .syntax import ScenarioSyntaxError

OK, MISMATCH, INPUT_ERROR = 0, 1, 2


class InputError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _load_snapshot(path: str):
    try:
        return restore(_read(path))
    except CorruptSnapshot as exc:
        raise InputError(f"{path}: {exc}") from None


def cmd_run(args: argparse.Namespace) -> int:
    try:
        sc = parse_scenario(_read(args.scenario))
    except (ScenarioSyntaxError, DanglingReference, ValueError) as exc:
        raise InputError(f"{args.scenario}: {exc}") from None
    state, trace, report = run_scenario(sc)
    text = format_trace(trace)
    if args.trace:
        Path(args.trace).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.snapshot:
        Path(args.snapshot).write_text(snapshot(state), encoding="utf-8")
    sys.stdout.write(report.render())
    return OK if report.ok else MISMATCH


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        report = validate_trace(parse_trace(_read(args.trace)))
    except MalformedTrace as exc:
        raise InputError(f"{args.trace}: {exc}") from None
    sys.stdout.write(report.render())
    return OK if report.ok else MISMATCH


def load_bridge(path: str) -> FederationBridge:
    base = Path(path).parent
    spaces: dict[str, str] = {}
    pairs = []
    for lineno, raw in enumerate(_read(path).splitlines(), 1):
        words = raw.split("#", 1)[0].split()
        if not words:
            continue
        if words[0] in ("space_a", "space_b") and len(words) == 2:
            spaces[words[0]] = str(base / words[1])
        elif words[0] == "recognize" and len(words) == 3:
            pairs.append((lineno, words[1], words[2]))
        else:
            raise InputError(f"{path}:{lineno}: expected 'space_a <file>', 'space_b <file>' or 'recognize <s> <s>'")
    if set(spaces) != {"space_a", "space_b"}:
        raise InputError(f"{path}: both space_a and space_b are required")
    bridge = FederationBridge(_load_snapshot(spaces["space_a"]), _load_snapshot(spaces["space_b"]))
    for lineno, x, y in pairs:
        ends = {}
        for word in (x, y):
            ident, _, side = word.partition("@")
            ends.setdefault(side or "?", []).append(ident)
        if "A" in ends and "B" in ends:
            x, y = ends["A"][0], ends["B"][0]
        else:
            x, y = x.partition("@")[0], y.partition("@")[0]
        try:
            bridge = establish_recognition(bridge, x, y)
        except DanglingReference as exc:
            raise InputError(f"{path}:{lineno}: {exc}") from None
    return bridge


def cmd_interop(args: argparse.Namespace) -> int:
    bridge = load_bridge(args.bridge)
    ids = [args.data] if args.data else sorted(bridge.space_a.data)
    status = OK
    for d in ids:
        try:
            verdict = check_interoperability(bridge, d)
        except PremiseViolation as exc:
            print(f"INTEROP {d} no premise-violation: {exc}")
            status = MISMATCH
            continue
        print(verdict.render())
        if not verdict.interoperable:
            status = MISMATCH
    return status


def load_pair(path: str) -> RefinedSpacePair:
    try:
        doc = json.loads(_read(path))
        pair = identity_pair(_load_snapshot(str(Path(path).parent / doc["space"])))
        for dec in doc.get("decompositions", []):
            children = [element_from_json(c) for c in dec["children"]]
            patches = {k: ConditionPatch.from_json(v) for k, v in dec.get("patches", {}).items()}
            pair = pair.decompose(dec["element"], children, patches, check=dec.get("check", True))
        return pair
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise InputError(f"{path}: malformed pair file: {exc}") from None
    except (UnionViolation, DanglingReference, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from None


def load_suite(directory: str, pair: RefinedSpacePair) -> list[SuiteScenario]:
    root = Path(directory)
    if not root.is_dir():
        raise InputError(f"{directory} is not a directory")
    suite = []
    for f in sorted(root.glob("*.scn")):
        try:
            sc = parse_scenario(f.read_text(encoding="utf-8"), base=pair.abstract_space)
        except ScenarioSyntaxError as exc:
            raise InputError(f"{f}: {exc}") from None
        suite.append(SuiteScenario(f.stem, "user", tuple(sc.calls)))
    return suite


def cmd_refine(args: argparse.Namespace) -> int:
    pair = load_pair(args.pair)
    suite = load_suite(args.suite, pair) if args.suite else None
    report = check_constraint_preserving(pair, suite)
    sys.stdout.write(report.render())
    return OK if report.preserving else MISMATCH


def cmd_check(args: argparse.Namespace) -> int:
    violations = validate_state(_load_snapshot(args.snapshot))
    for v in violations:
        print(v)
    if not violations:
        print("valid")
    return OK if not violations else MISMATCH


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dataspace", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="replay a scenario file")
    p.add_argument("scenario")
    p.add_argument("--trace", help="write the trace here instead of stdout")
    p.add_argument("--snapshot", help="write the final state snapshot here")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("validate", help="check a trace against the automaton and precedence constraints")
    p.add_argument("trace")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("interop", help="interoperability verdicts for a bridge definition")
    p.add_argument("bridge")
    p.add_argument("--data", help="only this data unit of space A")
    p.set_defaults(func=cmd_interop)

    p = sub.add_parser("refine", help="check a decomposition for success preservation")
    p.add_argument("pair")
    p.add_argument("--suite", help="directory of scenario files (default: generated suite)")
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("check", help="validate a state snapshot")
    p.add_argument("snapshot")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
