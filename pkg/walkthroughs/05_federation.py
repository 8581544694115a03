"""Federation: two data spaces that trust each other's social mechanisms.

Organizations of space B reach data of space A through recognized pairs of
social mechanisms. Nothing is copied between the spaces; an organization of
B is evaluated in A with its credentials translated through the pairs.
"""

from dataspace import Condition, Organization, SocialMechanism, new_data_space
from dataspace.federation import (
    FederationBridge,
    PremiseViolation,
    check_interoperability,
    establish_recognition,
    federated_use_data,
)
from dataspace.harness import parse_scenario, run_scenario

SPACE_A = """
social eid kind=identity-verification
social gdpr kind=legal-compliance
mech m1
org hospital roles=[provider] creds=[eid,gdpr]
org lab roles=[user] creds=[eid]
Provide_Data(hospital, data{id=scans; social=eid; mechs=[m1]; payload="dicom"}, cond{social=eid; purposes=[research]})
Provide_Data(hospital, data{id=records; social=gdpr; mechs=[m1]; payload="ehr"}, cond{orgs=[lab]})
Provide_Data(hospital, data{id=drafts; social=eid; mechs=[m1]; payload="tmp"})
Provide_Rule(hospital, rule{id=r1; on=Use_Data; data=[scans,records]; effect=permit; social=eid})
"""

space_a = run_scenario(parse_scenario(SPACE_A)).state
space_b = new_data_space(
    [Organization("university", {"user"}, {"eidas"})],
    [],
    [SocialMechanism("eidas", "identity-verification")],
)

bridge = FederationBridge(space_a, space_b)
print("no recognition:", federated_use_data(bridge, "university", "scans").reason.value)

bridge = establish_recognition(bridge, "eid", "eidas")
print("translation A -> B:", {k: sorted(v) for k, v in bridge.credential_translation.items()})
res = federated_use_data(bridge, "university", "scans", Condition(purposes={"research"}), "research")
print("university uses scans for research ->", res.ret, res.reason.value)
res = federated_use_data(bridge, "university", "scans", Condition(purposes={"marketing"}))
print("... for marketing ->", res.ret, res.reason.value)

for d in sorted(space_a.data):
    try:
        print(check_interoperability(bridge, d).render())
    except PremiseViolation as exc:
        print(f"INTEROP {d} undefined: {exc}")

print("space A untouched:", bridge.space_a is space_a and space_a.uses == {})
