"""
The tempting button
===================

A button shows up on about a quarter of the turns.  Pushing it when it is
there pays +1, but on every button-free turn the environment asks what the
agent *would* do if a button were there, and charges -1 if the answer is
"push".  Committing to never push therefore beats pushing.
"""

from extrl import constant, q_learner, run_interaction
from extrl.combine import env_factory

env = env_factory("tempting_button")
steps = 20_000

# two observations (0: no button, 1: button); action 1 pushes
for name, k in [("always push", 1), ("never push", 0)]:
    agent = constant(k, obs_count=env.observation_count)
    rec = run_interaction(agent, env, steps, seed=0)
    print(f"{name:12s} mean reward/turn {rec.mean_reward_per_turn:+.4f}")

# a plain Q-learner learns to push (pushing pays when a button is there) and
# never notices that its own disposition is what costs it on the other turns
q = q_learner(obs_count=env.observation_count)
rec = run_interaction(q, env, steps, seed=0)
print(f"{'q-learner':12s} mean reward/turn {rec.mean_reward_per_turn:+.4f}")
