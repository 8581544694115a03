import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from dataspace.cli import main

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "scenarios"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("path", sorted(CORPUS.glob("*.scn")), ids=lambda p: p.stem)
def test_run_reproduces_golden_trace(capsys, tmp_path, path):
    trace = tmp_path / "out.trace"
    code, out, _ = run(capsys, "run", path, "--trace", trace)
    assert code == 0, out
    golden = CORPUS / "golden" / f"{path.stem}.trace"
    assert trace.read_bytes() == golden.read_bytes()


def test_run_prints_trace_and_writes_snapshot(capsys, tmp_path):
    snap = tmp_path / "s.json"
    code, out, _ = run(capsys, "run", CORPUS / "basic_exchange.scn", "--snapshot", snap)
    assert code == 0
    assert out.startswith("t=0 op=Provide_Data actor=o1 target=d1 ret=1")
    assert "PASS" in out
    code, out, _ = run(capsys, "check", snap)
    assert (code, out) == (0, "valid\n")


def test_run_reports_mismatch(capsys, tmp_path):
    f = tmp_path / "bad.scn"
    f.write_text((CORPUS / "basic_exchange.scn").read_text().replace("assert count D = 1", "assert count D = 2"))
    code, out, _ = run(capsys, "run", f)
    assert code == 1
    assert "FAIL" in out and "got 1" in out


def test_run_syntax_error_is_input_error(capsys, tmp_path):
    f = tmp_path / "bad.scn"
    f.write_text("org o1 roles=[provider]\nShare_Data(o1, d1)\n")
    code, _, err = run(capsys, "run", f)
    assert code == 2
    assert "line 2" in err and "Provide_Data" in err


def test_missing_file_is_input_error(capsys, tmp_path):
    code, _, err = run(capsys, "run", tmp_path / "nope.scn")
    assert code == 2 and "cannot read" in err


def test_validate_golden_trace(capsys):
    code, out, _ = run(capsys, "validate", CORPUS / "golden" / "modification_cycle.trace")
    assert code == 0
    assert out.splitlines()[-1] == "d1 q_stop NOT-SUCCESS"


def test_validate_flags_precedence_violation(capsys, tmp_path):
    f = tmp_path / "edited.trace"
    f.write_text("t=0 op=Use_Data actor=o2 target=d1 ret=1 reason=ok affects=d1\n")
    code, out, _ = run(capsys, "validate", f)
    assert code == 1
    assert "ConstraintViolation(use-precedence)" in out


def test_validate_malformed_trace(capsys, tmp_path):
    f = tmp_path / "broken.trace"
    f.write_text("garbage\n")
    assert run(capsys, "validate", f)[0] == 2


def test_interop_bridge(capsys):
    code, out, _ = run(capsys, "interop", CORPUS / "bridge" / "bridge.txt")
    assert code == 1
    assert out.splitlines() == ["INTEROP d1 yes p1 cond{}", "INTEROP d2 no"]
    code, out, _ = run(capsys, "interop", CORPUS / "bridge" / "bridge.txt", "--data", "d1")
    assert code == 0 and out.startswith("INTEROP d1 yes")


def test_interop_without_recognition(capsys, tmp_path):
    for f in ("space_a.json", "space_b.json"):
        shutil.copy(CORPUS / "bridge" / f, tmp_path / f)
    (tmp_path / "bridge.txt").write_text("space_a space_a.json\nspace_b space_b.json\n")
    code, out, _ = run(capsys, "interop", tmp_path / "bridge.txt", "--data", "d1")
    assert (code, out) == (1, "INTEROP d1 no\n")


def test_interop_bad_bridge_file(capsys, tmp_path):
    f = tmp_path / "bridge.txt"
    f.write_text("space_a a.json\n")
    assert run(capsys, "interop", f)[0] == 2
    f.write_text("launch rockets\n")
    assert run(capsys, "interop", f)[0] == 2


@pytest.mark.parametrize("name, code", [
    ("identity", 0), ("split2", 0), ("mech-split", 0), ("social-split", 0), ("split3", 0),
    ("drop-social", 1), ("weak-orgs", 1), ("lost-capability", 1), ("narrow-window", 1), ("bad-partition", 1),
])
def test_refine_pair_files(capsys, name, code):
    got, out, _ = run(capsys, "refine", CORPUS / "refine" / f"{name}.json")
    assert got == code
    assert f'"preserving": {"true" if code == 0 else "false"}' in out


def test_refine_with_scenario_suite(capsys, tmp_path):
    (tmp_path / "excluded.scn").write_text("Use_Data(o3, d1)\n")
    (tmp_path / "member.scn").write_text("Use_Data(o2, d1, cond{}, analytics)\n")
    assert run(capsys, "refine", CORPUS / "refine" / "split2.json", "--suite", tmp_path)[0] == 0
    code, out, _ = run(capsys, "refine", CORPUS / "refine" / "weak-orgs.json", "--suite", tmp_path)
    assert code == 1 and "excluded" in out


def test_refine_malformed_pair(capsys, tmp_path):
    f = tmp_path / "pair.json"
    f.write_text("{}")
    assert run(capsys, "refine", f)[0] == 2


def test_check_reports_violations(capsys, tmp_path):
    doc = (CORPUS / "refine" / "abstract.json").read_text()
    f = tmp_path / "s.json"
    f.write_text(doc.replace('"social"', '"sociale"', 1))
    code, out, _ = run(capsys, "check", f)
    assert code == 1 and "MissingMandatoryAttribute" in out


def test_check_corrupt_snapshot(capsys, tmp_path):
    f = tmp_path / "s.json"
    f.write_text('{"version": 1, "orgs": ')
    code, _, err = run(capsys, "check", f)
    assert code == 2 and "corrupt" in err


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "dataspace", "check", str(CORPUS / "refine" / "abstract.json")],
                         capture_output=True, text=True)
    assert (res.returncode, res.stdout) == (0, "valid\n")
