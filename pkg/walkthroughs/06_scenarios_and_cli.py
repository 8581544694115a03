"""Scenario files, golden traces and the command line.

The shipped corpus in ``scenarios/`` doubles as documentation: each file is
a self-checking story. This script replays the corpus, compares it with the
golden traces and shows the equivalent ``dataspace`` commands.
"""

import subprocess
import sys
from pathlib import Path

from dataspace.harness import format_trace, parse_scenario, restore, run_scenario, snapshot, state_hash

corpus = Path(__file__).resolve().parent.parent / "scenarios"

for f in sorted(corpus.glob("*.scn")):
    state, trace, report = run_scenario(parse_scenario(f.read_text()))
    golden = (corpus / "golden" / f"{f.stem}.trace").read_text()
    same = format_trace(trace) == golden
    print(f"{f.name:28} checks={len(report.checks):2} ok={report.ok} golden={'match' if same else 'DIFF'}")
    assert state_hash(restore(snapshot(state))) == state_hash(state)

commands = [
    ["run", str(corpus / "basic_exchange.scn")],
    ["validate", str(corpus / "golden" / "modification_cycle.trace")],
    ["interop", str(corpus / "bridge" / "bridge.txt")],
    ["refine", str(corpus / "refine" / "narrow-window.json")],
    ["check", str(corpus / "refine" / "abstract.json")],
]
for args in commands:
    res = subprocess.run([sys.executable, "-m", "dataspace", *args], capture_output=True, text=True)
    first = (res.stdout or res.stderr).splitlines()[:2]
    print(f"\n$ dataspace {' '.join(Path(a).name if '/' in a else a for a in args)}  (exit {res.returncode})")
    for line in first:
        print("  ", line[:100])
