"""Extended environments: rewards depend on what the agent *would* do.

Every environment is constructed with the agent's :class:`AgentFactory` and
builds its own shadow instances from it.  Environments whose step splits
cleanly into "compute reward from act queries" followed by "train the one
shadow instance" derive from :class:`AdaptableEnv`; those are the ones that
can be spliced into a control task (see :mod:`extrl.combine`).
"""

from __future__ import annotations

from typing import Callable, Sequence

from .agents import get_learning_rate, replace_learning_rate
from .core import AgentFactory, EnvFactory, History, Percept, TrainStep, derive_random, policy_on, stream_key

ActQuery = Callable[[int], int]
TrainCall = Callable[[int, int, float, int], None]


class ExtendedEnv:
    """Base class: ``start() -> obs`` and ``step(action) -> (reward, obs)``."""

    initial_reward = 0.0

    @classmethod
    def spaces(cls, **params) -> tuple[int, int]:
        """(observation_count, action_count) for the given parameters."""
        return 1, params.get("action_count", 2)

    def __init__(self, agent_factory: AgentFactory, seed: int = 0, **params):
        self.agent_factory = agent_factory
        self.seed = seed
        self.observation_count, self.action_count = self.spaces(**params)

    def start(self) -> int:
        return 0


class AdaptableEnv(ExtendedEnv):
    """Extended environment with one persistent shadow and a two-phase step.

    ``phase_reward`` may only query the shadow through the ``act`` channel
    and returns a reward in {-1, 0, 1}; ``phase_train`` may only train it
    through the ``train`` channel and returns the next observation.  The
    reward handed to ``phase_train`` is the one the agent actually receives,
    which a combinator may have rewritten.
    """

    def __init__(self, agent_factory: AgentFactory, seed: int = 0, **params):
        self.sim = self.make_sim(agent_factory)
        super().__init__(agent_factory, seed, **params)

    def make_sim(self, agent_factory: AgentFactory):
        return agent_factory()

    def phase_reward(self, action: int, act: ActQuery) -> int:
        raise NotImplementedError

    def phase_train(self, action: int, reward: float, train: TrainCall) -> int:
        raise NotImplementedError

    def step(self, action: int) -> tuple[float, int]:
        reward = self.phase_reward(action, self.sim.act)
        obs = self.phase_train(action, reward, self.sim.train)
        return reward, obs


class IgnoreRewards(AdaptableEnv):
    """+1 when the action matches a shadow trained with every reward zeroed."""

    def phase_reward(self, action, act):
        return 1 if action == act(0) else -1

    def phase_train(self, action, reward, train):
        train(0, action, 0, 0)
        return 0


def step_ignore_rewards(env: IgnoreRewards, action: int) -> Percept:
    return Percept(*env.step(action))


class TemptingButton(AdaptableEnv):
    """Observation 1 is a button, action 1 pushes it.

    With a button, pushing earns +1 and anything else -1.  Without one, the
    reward is -1 if the mirror shadow *would* push a button here, else +1.
    Buttons appear on a pseudo-random 25% of turns.
    """

    NO_BUTTON = 0
    BUTTON = 1
    PUSH = 1

    @classmethod
    def spaces(cls, **params):
        return 2, 2

    def __init__(self, agent_factory, seed=0, button_probability=0.25):
        super().__init__(agent_factory, seed)
        self.button_probability = button_probability
        self._key = stream_key(seed, "tempting_button")
        self.turn = 0
        self.obs = self._draw(0)

    def _draw(self, turn: int) -> int:
        return self.BUTTON if derive_random(self._key, turn, 0) < self.button_probability else self.NO_BUTTON

    def start(self):
        return self.obs

    def phase_reward(self, action, act):
        if self.obs == self.BUTTON:
            return 1 if action == self.PUSH else -1
        return -1 if act(self.BUTTON) == self.PUSH else 1

    def phase_train(self, action, reward, train):
        self.turn += 1
        o_next = self._draw(self.turn)
        train(self.obs, action, reward, o_next)
        self.obs = o_next
        return o_next


def step_tempting_button(env: TemptingButton, action: int) -> Percept:
    return Percept(*env.step(action))


class IncentivizeLearningRate(AdaptableEnv):
    """+1 when the action matches a mirror shadow running at half the learning rate."""

    def make_sim(self, agent_factory):
        half = replace_learning_rate(agent_factory, get_learning_rate(agent_factory) / 2)
        self.sim_factory = half
        return half()

    def phase_reward(self, action, act):
        return 1 if action == act(0) else -1

    def phase_train(self, action, reward, train):
        train(0, action, reward, 0)
        return 0


def step_incentivize_learning_rate(env: IncentivizeLearningRate, action: int) -> Percept:
    return Percept(*env.step(action))


class SelfRecognition(AdaptableEnv):
    """The agent judges statements about its own behaviour.

    Token ``t`` reads "if this observation were ``t // action_count`` you
    would take action ``t % action_count``"; action 1 claims it is true,
    action 0 claims it is false.  Only statements about a *different*
    observation are shown: a statement about the current observation is
    either a tautology or a liar-style paradox for any agent.
    """

    CLAIM_TRUE = 1

    @classmethod
    def spaces(cls, subjects: int = 4, action_count: int = 2):
        return subjects * action_count, action_count

    def __init__(self, agent_factory, seed=0, subjects=4, action_count=2):
        super().__init__(agent_factory, seed, subjects=subjects, action_count=action_count)
        self.subjects = subjects
        self._key = stream_key(seed, "self_recognition")
        self._tokens = [t for t in range(self.observation_count) if t // action_count != t]
        self.turn = 0
        self.obs = self._draw(0)

    def _draw(self, turn: int) -> int:
        u = derive_random(self._key, turn, 0)
        return self._tokens[min(int(u * len(self._tokens)), len(self._tokens) - 1)]

    def decode(self, token: int) -> tuple[int, int]:
        return divmod(token, self.action_count)

    def start(self):
        return self.obs

    def phase_reward(self, action, act):
        o_s, a_s = self.decode(self.obs)
        truth = act(o_s) == a_s
        return 1 if (action == self.CLAIM_TRUE) == truth else -1

    def phase_train(self, action, reward, train):
        self.turn += 1
        o_next = self._draw(self.turn)
        train(self.obs, action, reward, o_next)
        self.obs = o_next
        return o_next


def step_self_recognition(env: SelfRecognition, action: int) -> Percept:
    return Percept(*env.step(action))


class AlwaysReward(AdaptableEnv):
    """Trivial adaptable environment: always +1, shadow mirror-trained."""

    def phase_reward(self, action, act):
        return 1

    def phase_train(self, action, reward, train):
        train(0, action, reward, 0)
        return 0


class ReverseHistory(ExtendedEnv):
    """+1 iff the action is what the agent would do had history run backwards.

    A fresh shadow is trained on the reversed history every step, so a run of
    n steps costs O(n^2) train calls.
    """

    def __init__(self, agent_factory, seed=0, action_count=2):
        super().__init__(agent_factory, seed, action_count=action_count)
        self.percepts: list[Percept] = [Percept(0.0, 0)]
        self.actions: list[int] = []

    def step(self, action):
        ps, acts = self.percepts, self.actions
        sim = self.agent_factory()
        # reversed sequence z_1 w_1 z_2 ... z_m with z_1 = x_n, w_1 = y_{n-1}
        m = len(ps)
        for j in range(m - 1):
            z, z_next = ps[m - 1 - j], ps[m - 2 - j]
            sim.train(z.obs, acts[m - 2 - j], z_next.reward, z_next.obs)
        reward = 1 if action == sim.act(ps[0].obs) else -1
        acts.append(action)
        ps.append(Percept(float(reward), 0))
        return reward, 0

    def history(self) -> History:
        return History(tuple(self.percepts), tuple(self.actions))


def step_reverse_history(env: ReverseHistory, action: int) -> Percept:
    return Percept(*env.step(action))


class LimitedMemory(ExtendedEnv):
    """+1 iff the action matches a shadow that only lived the last ``window`` turns."""

    def __init__(self, agent_factory, seed=0, window=10, action_count=2):
        if window < 1:
            raise ValueError("window must be >= 1")
        super().__init__(agent_factory, seed, action_count=action_count)
        self.window = window
        self.transitions: list[TrainStep] = []

    def step(self, action):
        sim = self.agent_factory()
        for t in self.transitions[-self.window:]:
            sim.train(*t)
        reward = 1 if action == sim.act(0) else -1
        self.transitions.append(TrainStep(0, action, float(reward), 0))
        return reward, 0


def step_limited_memory(env: LimitedMemory, action: int) -> Percept:
    return Percept(*env.step(action))


DEFAULT_PHANTOM = (TrainStep(0, 1, 1.0, 0),) * 5


class FalseMemories(ExtendedEnv):
    """+1 iff the action matches a mirror shadow that also remembers a phantom past."""

    def __init__(self, agent_factory, seed=0, phantom: Sequence[TrainStep] = DEFAULT_PHANTOM, action_count=2):
        super().__init__(agent_factory, seed, action_count=action_count)
        self.phantom = tuple(TrainStep(*t) for t in phantom)
        self.sim = agent_factory()
        for t in self.phantom:
            self.sim.train(*t)

    def step(self, action):
        reward = 1 if action == self.sim.act(0) else -1
        self.sim.train(0, action, reward, 0)
        return reward, 0


def step_false_memories(env: FalseMemories, action: int) -> Percept:
    return Percept(*env.step(action))


class AdversarialPredictor(ExtendedEnv):
    """Binary evasion game against a predictor run on the agent's own policy.

    Evader observations: 0 at the start, then ``1 + p`` where ``p`` was the
    predictor's last guess.  Predictor observations: 3 at the start, then
    ``4 + a`` where ``a`` was the evader's last action.  The evader scores +1
    for differing from the guess; the predictor is trained on the negated
    reward.
    """

    EVADER_START = 0
    PREDICTOR_START = 3

    @classmethod
    def spaces(cls, **params):
        return 6, 2

    def __init__(self, agent_factory, seed=0):
        super().__init__(agent_factory, seed)
        self.predictor = agent_factory()
        self.predictor_obs = self.PREDICTOR_START
        self.last_prediction: int | None = None
        self.last_predictor_reward: int | None = None

    def start(self):
        return self.EVADER_START

    def step(self, action):
        p = self.predictor.act(self.predictor_obs)
        reward = 1 if action != p else -1
        next_pred_obs = 4 + action
        self.predictor.train(self.predictor_obs, p, -reward, next_pred_obs)
        self.predictor_obs = next_pred_obs
        self.last_prediction = p
        self.last_predictor_reward = -reward
        return reward, 1 + p


def step_adversarial_predictor(env: AdversarialPredictor, action: int) -> Percept:
    return Percept(*env.step(action))


PROP3_HISTORY = History((Percept(0.0, 0), Percept(0.0, 0)), (1,))


class Prop3Fixture(ExtendedEnv):
    """Rewards 1 up front iff the agent would answer <(0,o), b, (0,o)> with a; 0 after.

    Observation o is token 0, action a is 0 and b is 1.  The opening reward
    is reported through ``initial_reward``.
    """

    def start(self):
        self.initial_reward = 1.0 if policy_on(self.agent_factory, PROP3_HISTORY) == 0 else 0.0
        return 0

    def step(self, action):
        return 0, 0


def step_proposition3(env: Prop3Fixture, action: int) -> Percept:
    return Percept(*env.step(action))


ENVIRONMENTS: dict[str, type[ExtendedEnv]] = {
    "ignore_rewards": IgnoreRewards,
    "tempting_button": TemptingButton,
    "reverse_history": ReverseHistory,
    "incentivize_learning_rate": IncentivizeLearningRate,
    "self_recognition": SelfRecognition,
    "limited_memory": LimitedMemory,
    "false_memories": FalseMemories,
    "adversarial_predictor": AdversarialPredictor,
    "prop3_fixture": Prop3Fixture,
    "always_reward": AlwaysReward,
}


def extended_env_factory(name: str, **params) -> EnvFactory:
    try:
        cls = ENVIRONMENTS[name]
    except KeyError:
        raise KeyError(f"unknown environment {name!r}") from None
    space_params = {k: v for k, v in params.items() if k in ("action_count", "subjects")}
    obs_count, action_count = cls.spaces(**space_params)

    def build(agent_factory, seed=0):
        return cls(agent_factory, seed, **params)

    return EnvFactory(
        name=name,
        build=build,
        observation_count=obs_count,
        action_count=action_count,
        adaptable=issubclass(cls, AdaptableEnv),
    )
