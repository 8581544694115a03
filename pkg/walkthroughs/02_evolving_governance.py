"""Evolving governance: rules change while the collaboration runs.

Deny rules override permits, guards limit when a rule applies, and only the
organization that issued a rule may modify or withdraw it.
"""

from dataclasses import replace

from dataspace import Condition, Effect, OpKind, Rule, Selector
from dataspace.governance import Decision, evaluate, modify_rule, provide_rule, request_context, stop_rule
from dataspace.harness import parse_scenario, run_scenario

SETUP = """
social s1 kind=policy-enforcement
social s2 kind=legal-compliance
mech m1
org supplier roles=[provider] creds=[s1,s2]
org oem roles=[user] creds=[s1]
org rival roles=[user] creds=[s2]
Provide_Data(supplier, data{id=specs; social=s1; mechs=[m1]; payload="cad"}, cond{purposes=[design]})
Provide_Rule(supplier, rule{id=open; on=Use_Data; data=specs; effect=permit; social=s1})
"""

state = run_scenario(parse_scenario(SETUP)).state


def decision(state, who):
    ctx = request_context(state, who, "specs", "design")
    return evaluate(state, OpKind.USE_DATA, who, "specs", ctx).value


print("rival, open rule only:", decision(state, "rival"))

block = Rule("block-rival", "supplier", Selector({OpKind.USE_DATA}, {"specs"}, "rival"),
             effect=Effect.DENY, social="s2")
state = provide_rule(state, "supplier", block).state
print("rival, open + block:", decision(state, "rival"))
print("oem, open + block:", decision(state, "oem"))

# The block only applies inside a window of logical time.
timed = replace(block, guard=Condition(valid_window=(0, 2)))
state = modify_rule(state, "supplier", "block-rival", timed).state
print(f"rival at clock {state.clock}, block limited to [0,2]:", decision(state, "rival"))

# Only the issuer may touch its rules.
res = stop_rule(state, "oem", "open")
print("oem tries to stop the supplier's rule ->", res.ret, res.reason.value)

res = stop_rule(res.state, "supplier", "open")
print("supplier stops its own rule ->", res.ret, res.reason.value)
print("rival afterwards:", decision(res.state, "rival"),
      "(no rule applies, so use falls back to the default deny)")
assert Decision.NO_APPLICABLE_RULE.value == decision(res.state, "rival")
