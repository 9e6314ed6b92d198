"""
CartPole combined with an extended environment
==============================================

cartpole*ignore_rewards runs a cart-pole episode while IgnoreRewards
watches the same agent.  Observations and actions are pairs; whenever
IgnoreRewards would punish, the step's reward drops to -1.  The reality
check lets the agent satisfy the extended half and get on with balancing.
This is a short version of the learning-curve experiment.
"""

import numpy as np

from extrl import q_learner, rc_wrap
from extrl.bench import episode_rewards, moving_average
from extrl.combine import env_factory

env_name = "cartpole*ignore_rewards"
env = env_factory(env_name)
episodes = 1500

base = q_learner().with_spaces(env.action_count, env.observation_count)
for label, factory in [("q", base), ("rc(q)", rc_wrap(base))]:
    rewards = np.array(episode_rewards(factory, env_name, episodes, seed=0))
    ma = moving_average(rewards)
    marks = ", ".join(f"ep {i + 1}: {ma[i]:6.1f}" for i in (99, 499, 999, episodes - 1))
    print(f"{label:6s} 100-episode moving average  {marks}")
