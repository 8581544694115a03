import random

import pytest
from hypothesis import given, settings, strategies as st

import gen
from dataspace.conditions import Condition
from dataspace.federation import (
    FederationBridge,
    FederationError,
    PremiseViolation,
    RecognitionMap,
    candidate_conditions,
    check_interoperability,
    establish_recognition,
    federated_use_data,
)
from dataspace.harness import parse_scenario, run_scenario
from dataspace.model import DanglingReference, Organization, ReasonCode, SocialMechanism, new_data_space
from dataspace.operations import use_data

seeds = st.integers(0, 2**32 - 1)

SPACE_A = """\
social s1
social s2
mech m1
org o1 roles=[provider] creds=[s1]
org o2 roles=[user] creds=[s1]
Provide_Data(o1, data{id=d1; social=s1; mechs=[m1]; payload="p"}, cond{purposes=[analytics]})
Provide_Rule(o1, rule{id=r1; on=Use_Data; effect=permit; social=s1})
"""


def space_a(text=SPACE_A):
    return run_scenario(parse_scenario(text)).state


def space_b():
    return new_data_space(
        [Organization("p1", frozenset({"user"}), frozenset({"t2"}))],
        [],
        [SocialMechanism("t2"), SocialMechanism("t3")],
    )


def bridge(*pairs):
    b = FederationBridge(space_a(), space_b())
    for x, y in pairs:
        b = establish_recognition(b, x, y)
    return b


# -- establish_recognition -------------------------------------------------


def test_recognition_translates_credentials():
    b = bridge(("s1", "t2"))
    assert b.credential_translation == {"o1": {"t2"}, "o2": {"t2"}}
    assert b.credentials_in_a("p1") == {"s1"}


def test_unknown_social_is_dangling():
    with pytest.raises(DanglingReference) as exc:
        bridge(("s1", "s9"))
    assert exc.value.symbol == "s9"


def test_recognition_is_idempotent():
    assert bridge(("s1", "t2"), ("s1", "t2")).recognition == bridge(("s1", "t2")).recognition


def test_argument_order_does_not_matter():
    assert bridge(("t2", "s1")).recognition == bridge(("s1", "t2")).recognition


def test_recognition_map_queries():
    m = RecognitionMap(frozenset({("s1", "t2"), ("s2", "t2")}))
    assert m.a_for_b("t2") == {"s1", "s2"}
    assert m.b_for_a("s1") == {"t2"}
    assert m.recognizes("s1", "t2") and not m.recognizes("t2", "s1")


# -- federated_use_data ----------------------------------------------------


def native_with_translated_credentials(b, o, d, cond, purpose):
    """Dual execution: put a user with the translated credentials into A directly."""
    a = b.space_a
    actor = Organization(o, frozenset({"user"}), b.credentials_in_a(o))
    return use_data(a.evolve(orgs={**a.orgs, o: actor}), o, d, cond, purpose)


def test_recognized_and_compatible_use_succeeds():
    b = bridge(("s1", "t2"))
    cond = Condition(purposes={"analytics"})
    res = federated_use_data(b, "p1", "d1", cond, "analytics")
    assert res.ret == 1
    assert res.ret == native_with_translated_credentials(b, "p1", "d1", cond, "analytics").ret


def test_no_recognition():
    res = federated_use_data(bridge(), "p1", "d1")
    assert (res.ret, res.reason) == (0, ReasonCode.NO_RECOGNITION)


def test_recognized_but_incompatible():
    b = bridge(("s1", "t2"))
    res = federated_use_data(b, "p1", "d1", Condition(purposes={"resale"}))
    assert (res.ret, res.reason) == (0, ReasonCode.INCOMPATIBLE)


def test_unit_provided_to_b_is_not_federated():
    a = space_a()
    b_space = space_b().evolve(provider_of={"d1": "p1"})
    with pytest.raises(FederationError):
        federated_use_data(FederationBridge(a, b_space), "p1", "d1")


def test_federated_use_changes_nothing():
    b = bridge(("s1", "t2"))
    res = federated_use_data(b, "p1", "d1")
    assert res.state is b.space_a
    assert res.state.uses == b.space_a.uses


# -- check_interoperability ------------------------------------------------


def test_full_recognition_gives_witness():
    b = bridge(("s1", "t2"))
    verdict = check_interoperability(b, "d1")
    assert verdict.interoperable
    org, cond = verdict.witness
    assert org == "p1"
    assert federated_use_data(b, org, "d1", cond, verdict.purpose).ret == 1
    assert verdict.render().startswith("INTEROP d1 yes p1 cond{")


def test_witness_matches_exhaustive_candidate_search():
    b = bridge(("s1", "t2"))
    found = [
        (o, c, p) for o in sorted(b.space_b.orgs) for c, p in candidate_conditions(b.space_a, "d1")
        if federated_use_data(b, o, "d1", c, p).ret == 1
    ]
    verdict = check_interoperability(b, "d1")
    assert found and (verdict.witness[0], verdict.witness[1], verdict.purpose) == found[0]


def test_without_recognition_not_interoperable():
    verdict = check_interoperability(bridge(), "d1")
    assert not verdict.interoperable and verdict.witness is None
    assert verdict.render() == "INTEROP d1 no"


def test_premise_fails_when_nobody_can_use_natively():
    text = SPACE_A.replace("Provide_Rule(o1, rule{id=r1; on=Use_Data; effect=permit; social=s1})\n", "")
    b = FederationBridge(space_a(text), space_b())
    with pytest.raises(PremiseViolation):
        check_interoperability(b, "d1")


def test_unknown_unit_is_a_premise_violation():
    with pytest.raises(PremiseViolation):
        check_interoperability(bridge(("s1", "t2")), "d7")


# -- properties ------------------------------------------------------------


def _verdicts(b):
    out = {}
    for d in sorted(b.space_a.data):
        try:
            out[d] = check_interoperability(b, d)
        except PremiseViolation:
            out[d] = None
    return out


@settings(max_examples=60)
@given(seeds)
def test_recognition_symmetry(seed):
    state = gen.exchange_space(random.Random(seed))
    forward = gen.mirrored_bridge(state)
    backward = gen.mirrored_bridge(state, {})
    for a, b in sorted(gen.PEER_SOCIAL.items()):
        backward = establish_recognition(backward, b, a)
    assert _verdicts(forward) == _verdicts(backward)


@settings(max_examples=60)
@given(seeds)
def test_witnesses_replay(seed):
    b = gen.mirrored_bridge(gen.exchange_space(random.Random(seed)))
    for d, v in _verdicts(b).items():
        if v is not None and v.interoperable:
            org, cond = v.witness
            assert federated_use_data(b, org, d, cond, v.purpose).ret == 1


@settings(max_examples=60)
@given(seeds)
def test_federation_is_pure(seed):
    rng = random.Random(seed)
    b = gen.mirrored_bridge(gen.exchange_space(rng))
    before = (b.space_a.digest, b.space_b.digest)
    _verdicts(b)
    for o in b.space_b.orgs:
        for d in gen.DATA:
            federated_use_data(b, o, d, gen.condition(rng), rng.choice((None,) + gen.PURPOSES))
    assert (b.space_a.digest, b.space_b.digest) == before


@settings(max_examples=100)
@given(seeds)
def test_native_and_federated_success_agree_under_full_recognition(seed):
    rng = random.Random(seed)
    b = gen.mirrored_bridge(gen.exchange_space(rng))
    for o in sorted(b.space_b.orgs):
        for d in sorted(b.space_a.data):
            cond, purpose = gen.condition(rng), rng.choice((None,) + gen.PURPOSES)
            native = use_data(b.space_a, o, d, cond, purpose).ret
            assert federated_use_data(b, o, d, cond, purpose).ret == native
