import random

from extrl import agents
from extrl.combine import env_factory
from extrl.reality_check import rc_wrap


def fit(factory, env_name, seed=None, **params):
    """Resize an agent factory to an environment's spaces (and optionally reseed)."""
    ef = env_factory(env_name, **params)
    f = factory.with_spaces(ef.action_count, ef.observation_count)
    if seed is not None:
        f = f.with_seed(seed)
    return f, ef


def random_factory(rng: random.Random, *, action_count=2, obs_count=3, wrap_prob=0.3):
    """A randomly parameterized agent factory of any kind, sometimes rc-wrapped."""
    seed = rng.randrange(2**32)
    kind = rng.choice(["constant", "random", "q", "q", "q"])
    if kind == "constant":
        f = agents.constant(rng.randrange(action_count), action_count=action_count, obs_count=obs_count, seed=seed)
    elif kind == "random":
        f = agents.random_agent(action_count=action_count, obs_count=obs_count, seed=seed)
    else:
        f = agents.q_learner(
            learning_rate=rng.choice([0.0, 0.05, 0.1, 0.5, 1.0]),
            discount=rng.choice([0.0, 0.5, 0.95]),
            exploration=rng.choice([0.0, 0.05, 0.3, 1.0]),
            action_count=action_count,
            obs_count=obs_count,
            seed=seed,
            tie_break=rng.choice(["random", "lowest"]),
        )
    if rng.random() < wrap_prob:
        f = rc_wrap(f)
    return f


def random_calls(rng: random.Random, n: int, *, action_count=2, obs_count=3):
    """Random interleaved act/train call sequence."""
    calls = []
    for _ in range(n):
        if rng.random() < 0.5:
            calls.append(("act", rng.randrange(obs_count)))
        else:
            calls.append(
                (
                    "train",
                    (
                        rng.randrange(obs_count),
                        rng.randrange(action_count),
                        float(rng.choice([-1, 0, 1, 0.5])),
                        rng.randrange(obs_count),
                    ),
                )
            )
    return calls


def replay_calls(agent, calls):
    out = []
    for kind, arg in calls:
        if kind == "act":
            out.append(agent.act(arg))
        else:
            agent.train(*arg)
    return out
