"""
A tour of the extended environments
===================================

Each environment receives the agent's factory and builds its own copies of
the agent.  A constant agent is unaffected by what those copies learn, so
it is usually rewarded; a learning agent is judged on counterfactual
versions of itself and often is not.
"""

from extrl import constant, q_learner, random_agent, run_interaction
from extrl.combine import env_factory
from extrl.extended_envs import ENVIRONMENTS

steps = {"reverse_history": 300}

print(f"{'environment':28s} {'constant':>9s} {'random':>9s} {'q':>9s}")
for name in ENVIRONMENTS:
    if name == "prop3_fixture":
        continue
    env = env_factory(name)
    cells = []
    for make in (constant, random_agent, q_learner):
        if name == "incentivize_learning_rate" and make is not q_learner:
            cells.append("n/a")  # needs a learning rate to halve
            continue
        agent = make().with_spaces(env.action_count, env.observation_count)
        rec = run_interaction(agent, env, steps.get(name, 5000), seed=1)
        cells.append(f"{rec.mean_reward_per_turn:+.3f}")
    print(f"{name:28s} " + " ".join(f"{c:>9s}" for c in cells))
