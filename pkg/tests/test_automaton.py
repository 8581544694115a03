import random

import pytest
from hypothesis import given, strategies as st

import gen
import oracles
from dataspace.automaton import (
    AutomatonState,
    OpEvent,
    TRANSITIONS,
    reachable_qf,
    run,
    step,
    success,
)
from dataspace.calls import apply
from dataspace.harness import TraceEvent, project
from dataspace.harness.snapshot import state_hash
from dataspace.model import OpKind

Q0, Q1, Q2, QF, QMOD, QSTOP = AutomatonState


def ev(kind, ret=1, actor="o1", target="d1"):
    return OpEvent(OpKind(kind), actor, target, ret)


PD, PR, UD, SD = "Provide_Data", "Provide_Rule", "Use_Data", "Stop_Data"


def test_provide_from_initial():
    assert step(Q0, ev(PD)) is Q1


def test_undefined_pair_self_loops():
    assert step(Q0, ev(UD)) is Q0


def test_use_after_modification_resumes_collaboration():
    assert step(QMOD, ev(UD)) is QF


def test_basic_chain_reaches_active_collaboration():
    assert run([ev(PD), ev(PR, target="r1"), ev(UD)]) is QF


def test_stop_data_terminates():
    assert run([ev(PD), ev(SD)]) is QSTOP


def test_empty_trace_stays_initial():
    assert run([]) is Q0


def test_success_of_basic_chain():
    assert success([ev(PD), ev(PR), ev(UD)])


def test_failed_use_leaves_rules_established():
    trace = [ev(PD), ev(PR), ev(UD, ret=0)]
    assert not success(trace)
    assert run(trace) is Q2


@pytest.mark.parametrize("q, expected", [
    (QSTOP, False), (QMOD, True), (Q0, True), (Q1, True), (Q2, True), (QF, True),
])
def test_reachability_of_active_collaboration(q, expected):
    assert reachable_qf(q) is expected
    assert oracles.qf_reachable_from(q.value) is expected


def test_transition_table_matches_edge_list():
    table = {(src.value, kind.value, dst.value) for (src, kind), dst in TRANSITIONS.items()}
    assert table == set(oracles.EDGES)


@pytest.mark.parametrize("q", list(AutomatonState))
@pytest.mark.parametrize("kind", list(OpKind))
@pytest.mark.parametrize("ret", [0, 1])
def test_step_is_total(q, kind, ret):
    assert step(q, ev(kind, ret)) in AutomatonState


def test_ret_must_be_binary():
    with pytest.raises(ValueError):
        ev(PD, ret=2)


@given(st.lists(st.sampled_from(oracles.EVENTS), max_size=12))
def test_stop_is_absorbing(tail):
    trace = [ev(PD), ev(SD)] + [ev(k, r) for k, r in tail]
    assert run(trace) is QSTOP


@given(st.lists(st.sampled_from(oracles.EVENTS), max_size=8))
def test_success_matches_reachability_oracle(trace):
    assert success([ev(k, r) for k, r in trace]) == oracles.success(trace)


@given(st.integers(0, 2**32 - 1), st.integers(1, 30))
def test_engine_lifecycle_agrees_with_automaton(seed, n):
    rng = random.Random(seed)
    state = gen.space(rng)
    trace = []
    for _ in range(n):
        c = gen.call(rng, state)
        clock = state.clock
        res = apply(state, c)
        state = res.state
        trace.append(TraceEvent(clock, c.kind, c.actor, c.target, res.ret, res.reason,
                                state_hash(state), res.affects))
    for d in gen.DATA:
        assert run(project(trace, d)) is state.lifecycle.get(d, Q0)
