"""
Equivalent policies, different values
=====================================

Two agents that agree on every history either of them could actually
produce can still earn different rewards in an extended environment,
because the environment may probe an impossible history.  pi1 always plays
action 0; pi2 plays action 1 on exactly one history that pi1 itself would
never generate.
"""

from extrl import constant, enumerate_histories, policy_on, run_interaction, traditionally_equivalent_on
from extrl.agents import prop3_twin
from extrl.combine import env_factory
from extrl.extended_envs import PROP3_HISTORY

pi1, pi2 = constant(0), prop3_twin()

histories = list(enumerate_histories(3, 1, 2, rewards=(0, 1)))
print("traditionally equivalent on", len(histories), "short histories:",
      traditionally_equivalent_on(pi1, pi2, histories))

# the probe history <(0,0), 1, (0,0)> is impossible for both agents
print("pi1 on probe:", policy_on(pi1, PROP3_HISTORY), " pi2 on probe:", policy_on(pi2, PROP3_HISTORY))

env = env_factory("prop3_fixture")
for name, f in [("pi1", pi1), ("pi2", pi2)]:
    print(name, "value:", run_interaction(f, env, 3, seed=0).value)
