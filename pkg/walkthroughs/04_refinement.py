"""Refinement: decompose elements of a space and check that success survives.

A decomposition splits a data unit, mechanism, social mechanism or
organization into children. Operations on the parent become the conjunction
of the same operations on every child, and a scenario suite compares success
in the abstract and refined spaces.
"""

from dataspace import Condition, DataProvisionMechanism, DataUnit, Payload
from dataspace.harness import parse_scenario, run_scenario
from dataspace.refinement import (
    ConditionPatch,
    UnionViolation,
    check_constraint_preserving,
    decompose,
    default_suite,
)

SPACE = """
social s1 kind=identity-verification caps=[identity,policy]
mech m1 kind=api-endpoint caps=[api,batch]
org o1 roles=[provider] creds=[s1]
org o2 roles=[user] creds=[s1]
org o3 roles=[user]
Provide_Data(o1, data{id=d1; social=s1; mechs=[m1]; payload="abcdef"}, cond{orgs=[o1,o2]; window=[0,10]})
Provide_Rule(o1, rule{id=r1; on=Use_Data; data=d1; effect=permit; social=s1})
"""

state = run_scenario(parse_scenario(SPACE)).state
d1 = state.data["d1"]


def half(i, content):
    return DataUnit(i, d1.header, Payload.from_bytes(content), d1.mechanisms)


suite = default_suite(decompose(state, "d1", [half("d1a", "abc"), half("d1b", "def")]))
print("default suite:", len(suite), "scenarios in families", sorted({s.family for s in suite}))

pair = decompose(state, "d1", [half("d1a", "abc"), half("d1b", "def")])
print("payload split preserving:", check_constraint_preserving(pair).preserving)

pair = decompose(state, "m1", [DataProvisionMechanism("m_api", "api-endpoint", {"api"}),
                               DataProvisionMechanism("m_batch", "file", {"batch"})])
print("mechanism split preserving:", check_constraint_preserving(pair).preserving)

try:
    decompose(state, "d1", [half("d1a", "abc"), half("d1b", "xyz")])
except UnionViolation as exc:
    print("rejected:", exc)

weak = decompose(state, "d1", [half("d1a", "abc"), half("d1b", "def")],
                 {"d1a": ConditionPatch(drop=frozenset({"orgs"}))})
report = check_constraint_preserving(weak)
print("child without the org restriction preserving:", report.preserving)
for c in report.counterexamples[:3]:
    print("  ", c.scenario, c.variant, c.detail)

narrow = decompose(state, "d1", [half("d1a", "abc"), half("d1b", "def")],
                   {"d1b": ConditionPatch(set=Condition(valid_window=(0, 5)))})
report = check_constraint_preserving(narrow)
print("child with a narrower window preserving:", report.preserving,
      f"({len(report.counterexamples)} counterexamples)")
