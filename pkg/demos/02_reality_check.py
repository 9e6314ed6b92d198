"""
Reality Check on IgnoreRewards
==============================

IgnoreRewards pays +1 when the agent acts as it would have acted had every
reward so far been zero.  The environment keeps a shadow copy of the agent
and trains it on zeroed rewards.  A bare Q-learner drifts away from its
shadow; wrapped in the reality check, the shadow notices that its training
stream contradicts its own policy, freezes, and from then on the
environment simply rewards one fixed action.
"""

import numpy as np

from extrl import Interaction, q_learner, rc_wrap
from extrl.combine import env_factory

env = env_factory("ignore_rewards")
steps = 30_000

for label, factory in [("q", q_learner()), ("rc(q)", rc_wrap(q_learner()))]:
    run = Interaction(factory, env, seed=0)
    run.start()
    rewards = np.array([run.step()[1] for _ in range(steps)])
    tail = rewards[-steps // 10 :].mean()
    print(f"{label:6s} final-10% mean reward {tail:+.3f}")
    if label == "rc(q)":
        # the agent itself never freezes on its genuine stream; the shadow does
        print(f"       agent frozen: {run.agent.frozen}, shadow frozen: {run.env.sim.frozen}")
