"""Splicing an adaptable extended environment into a control task (G*E).

Combined actions and observations are pairs encoded as single tokens::

    token = g_component * |E-space| + e_component

The combined environment is continuing: when G's episode ends it is reset
immediately, and ``episode_done`` marks the step that ended it.
"""

from __future__ import annotations

from .control_tasks import CartPole, ContinuingTask
from .core import AgentFactory, EnvFactory, ExtRLError
from .extended_envs import ENVIRONMENTS, AdaptableEnv, extended_env_factory

CONTROL_TASKS = {"cartpole": CartPole}


class NotAdaptableError(ExtRLError, ValueError):
    pass


def encode_pair(g: int, e: int, e_count: int) -> int:
    return g * e_count + e


def decode_pair(token: int, e_count: int) -> tuple[int, int]:
    return divmod(token, e_count)


def check_adaptable(env_name: str) -> bool:
    try:
        cls = ENVIRONMENTS[env_name]
    except KeyError:
        raise KeyError(f"unknown environment {env_name!r}") from None
    return issubclass(cls, AdaptableEnv)


class CombinedEnv:
    """G*E for an episodic task ``g`` and an adaptable environment class.

    ``agent_factory`` must produce agents over the combined spaces; the
    E instance's single shadow is built from it and only ever sees
    combined-space observations and actions.
    """

    def __init__(self, g, e_cls: type[AdaptableEnv], agent_factory: AgentFactory, seed: int = 0, **e_params):
        if not issubclass(e_cls, AdaptableEnv):
            raise NotAdaptableError(f"{e_cls.__name__} is not adaptable")
        self.g = g
        self.e = e_cls(agent_factory, seed, **e_params)
        self.e_obs_count = self.e.observation_count
        self.e_action_count = self.e.action_count
        self.observation_count = g.observation_count * self.e_obs_count
        self.action_count = g.action_count * self.e_action_count
        self.prev_obs: int | None = None
        self.episode_done = False
        self.last_e_reward: int | None = None
        self.last_g_reward: float | None = None

    def start(self) -> int:
        return combine_start(self)

    def step(self, action: int) -> tuple[float, int]:
        return combine_step(self, action)

    # channels handed to the E phases
    def _act_query(self, o: int) -> int:
        joint = self.e.sim.act(encode_pair(self.prev_obs, o, self.e_obs_count))
        return joint % self.e_action_count

    def _train_call(self, a_g: int, o_g: int):
        prev = self.prev_obs
        e_obs, e_act = self.e_obs_count, self.e_action_count
        sim = self.e.sim

        def train(o1, a, r, o2):
            sim.train(encode_pair(prev, o1, e_obs), encode_pair(a_g, a, e_act), r, encode_pair(o_g, o2, e_obs))

        return train


def combine_start(env: CombinedEnv) -> int:
    env.prev_obs = env.g.reset()
    o_e = env.e.start()
    return encode_pair(env.prev_obs, o_e, env.e_obs_count)


def combine_step(env: CombinedEnv, action: int) -> tuple[float, int]:
    if env.prev_obs is None:
        raise RuntimeError("start() must be called before step()")
    a_g, a_e = decode_pair(action, env.e_action_count)
    o_g, r_g, done = env.g.step(a_g)
    if done:
        o_g = env.g.reset()
    env.episode_done = done

    e_reward = env.e.phase_reward(a_e, env._act_query)
    if e_reward not in (-1, 0, 1):
        raise ValueError(f"adaptable environment emitted reward {e_reward!r}")
    reward = min(r_g - 1, -1) if e_reward == -1 else r_g
    env.last_e_reward, env.last_g_reward = e_reward, r_g

    o_e = env.e.phase_train(a_e, reward, env._train_call(a_g, o_g))
    env.prev_obs = o_g
    return reward, encode_pair(o_g, o_e, env.e_obs_count)


def env_factory(name: str, **params) -> EnvFactory:
    """Resolve an environment name: ``cartpole``, an extended env, or ``G*E``."""
    if "*" in name:
        g_name, e_name = name.split("*", 1)
        if g_name not in CONTROL_TASKS:
            raise KeyError(f"unknown control task {g_name!r}")
        if e_name not in ENVIRONMENTS:
            raise KeyError(f"unknown environment {e_name!r}")
        if not check_adaptable(e_name):
            raise NotAdaptableError(f"{e_name!r} cannot be combined with a control task")
        g_cls = CONTROL_TASKS[g_name]
        e_cls = ENVIRONMENTS[e_name]
        e_obs, e_act = e_cls.spaces(**params)

        def build(agent_factory, seed=0):
            return CombinedEnv(g_cls(seed), e_cls, agent_factory, seed, **params)

        return EnvFactory(
            name=name,
            build=build,
            observation_count=g_cls.observation_count * e_obs,
            action_count=g_cls.action_count * e_act,
            episodic=True,
        )
    if name in CONTROL_TASKS:
        task_cls = CONTROL_TASKS[name]

        def build_task(agent_factory, seed=0):
            # non-extended: the agent factory is never consulted
            return ContinuingTask(task_cls(seed, **params))

        return EnvFactory(
            name=name,
            build=build_task,
            observation_count=task_cls.observation_count,
            action_count=task_cls.action_count,
            extended=False,
            episodic=True,
        )
    return extended_env_factory(name, **params)


def registered_env_names() -> list[str]:
    names = list(CONTROL_TASKS) + list(ENVIRONMENTS)
    names += [f"{g}*{e}" for g in CONTROL_TASKS for e in ENVIRONMENTS if check_adaptable(e)]
    return names
