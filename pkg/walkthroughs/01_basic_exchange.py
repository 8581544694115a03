"""Basic exchange: a provider shares one data unit with one user.

Three operations make the exchange: the provider offers the unit under a
provision condition, a rule permits its use, and the user consumes it under
a usage condition compatible with the provider's terms.
"""

from dataspace import (
    Condition,
    DataProvisionMechanism,
    DataUnit,
    Effect,
    Header,
    OpCall,
    OpKind,
    Organization,
    Payload,
    Rule,
    Selector,
    SocialMechanism,
    apply,
    new_data_space,
)

state = new_data_space(
    orgs=[
        Organization("maker", {"provider"}, {"idv"}),
        Organization("recycler", {"user"}, {"idv"}),
    ],
    mechs=[DataProvisionMechanism("api", "api-endpoint", {"rest"})],
    socials=[SocialMechanism("idv", "identity-verification")],
)
print("empty space:", state)

passport = DataUnit(
    "battery-42",
    Header(social="idv", format="json", chemistry="LFP"),
    Payload.from_bytes('{"capacity_kwh": 75}'),
    {"api"},
)
terms = Condition(purposes={"recycling", "analytics"}, valid_window=(0, 100))

res = apply(state, OpCall.provide_data("maker", passport, terms))
print("Provide_Data ->", res.ret, res.reason.value)
state = res.state

# Without a rule, use is denied by default.
res = apply(state, OpCall.use_data("recycler", "battery-42", purpose="recycling"))
print("Use_Data before any rule ->", res.ret, res.reason.value)
state = res.state

permit = Rule("share-passports", "maker", Selector({OpKind.USE_DATA}, {"battery-42"}),
              effect=Effect.PERMIT, social="idv")
state = apply(state, OpCall.provide_rule("maker", permit)).state

# A usage condition asking for more than the provider grants is incompatible.
greedy = Condition(purposes={"recycling", "resale"})
res = apply(state, OpCall.use_data("recycler", "battery-42", greedy))
print("Use_Data asking for resale ->", res.ret, res.reason.value)
state = res.state

res = apply(state, OpCall.use_data("recycler", "battery-42", Condition(purposes={"recycling"}), "recycling"))
print("Use_Data for recycling ->", res.ret, res.reason.value)
state = res.state

print("lifecycle of battery-42:", state.lifecycle["battery-42"].value)
print("uses:", dict(state.uses))
print("clock counts every attempt:", state.clock)
