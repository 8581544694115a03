"""Transaction lifecycle: the per-unit automaton and trace validation.

Each data unit moves through q0, q1, q2, q_f, q_mod and q_stop as successful
operations affect it. A trace can be replayed independently of the engine
to check precedence and to reach a success verdict.
"""

from dataspace.automaton import reachable_qf, run
from dataspace.harness import TraceEvent, format_trace, parse_scenario, project, run_scenario, validate_trace

SCENARIO = """
social s1
mech m1
org o1 roles=[provider] creds=[s1]
org o2 roles=[user] creds=[s1]
Provide_Data(o1, data{id=d1; social=s1; mechs=[m1]; payload="rows"})
Provide_Rule(o1, rule{id=r1; on=Use_Data; data=d1; effect=permit; social=s1})
Use_Data(o2, d1)
Modify_Data(o1, d1, data{id=d1; social=s1; mechs=[m1]; format=csv}, cond{max_uses=5})
Use_Data(o2, d1)
Modify_Data(o1, d1, data{id=d1; social=s1; mechs=[m1]; format=parquet})
Stop_Rule(o1, r1)
"""

state, trace, _ = run_scenario(parse_scenario(SCENARIO))
print(format_trace(trace), end="")

report = validate_trace(trace)
print(report.render(), end="")

events = project(trace, "d1")
print("events seen by d1's automaton:", len(events), "->", run(events).value)
print("can d1 still reach active collaboration?", reachable_qf(state.lifecycle["d1"]))

# A hand-written trace that uses data nobody provided breaks precedence.
forged = [TraceEvent(0, "Use_Data", "o2", "d9", 1, "ok", affects=("d9",))]
print(validate_trace(forged).render(), end="")
