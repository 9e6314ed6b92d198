"""Domain types, the act/train runtime protocol and the interaction loop.

Agents and environments speak in small integer tokens.  An agent instance
exposes ``act(obs) -> action`` (a pure query) and
``train(o_prev, a, r, o_next)``; an environment instance exposes
``start() -> obs`` and ``step(action) -> (reward, obs)``.  Extended
environments receive an :class:`AgentFactory` at construction and may build
as many shadow copies of the agent as they like.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from dataclasses import dataclass, field
from numbers import Real
from typing import Any, Callable, Iterable, Iterator, NamedTuple, Protocol, Sequence

_MASK64 = (1 << 64) - 1


class ExtRLError(Exception):
    """Base class for errors raised by this package."""


class SpaceMismatchError(ExtRLError, ValueError):
    pass


class NonFiniteRewardError(ExtRLError, ValueError):
    pass


class UnsupportedAgentError(ExtRLError, TypeError):
    """Raised when an operation is undefined for an agent kind."""


class MalformedHistoryError(ExtRLError, ValueError):
    pass


# --------------------------------------------------------------------------
# Counter-based randomness
# --------------------------------------------------------------------------


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_random(seed: int, counter: int, obs: int) -> float:
    """Uniform draw in [0, 1) that is a pure function of its three arguments.

    Uses chained splitmix64 finalizers, so the value is identical across runs,
    processes and platforms.  Nothing is advanced or cached.
    """
    h = _splitmix64(seed & _MASK64)
    h = _splitmix64(h ^ (counter & _MASK64))
    h = _splitmix64(h ^ (obs & _MASK64))
    return (h >> 11) * (1.0 / 9007199254740992.0)


def stream_key(seed: int, tag: str) -> int:
    """Derive an independent 64-bit key for a named random stream.

    Environments and agents are usually given the same integer seed; keying
    each stream by a tag keeps their draws uncorrelated.
    """
    h = _splitmix64(seed & _MASK64)
    for byte in tag.encode("utf-8"):
        h = _splitmix64(h ^ byte)
    return h


# --------------------------------------------------------------------------
# Domain types
# --------------------------------------------------------------------------


class Percept(NamedTuple):
    reward: float
    obs: int


class TrainStep(NamedTuple):
    o_prev: int
    a: int
    r: float
    o_next: int


def _check_probability(name: str, value: float | None) -> None:
    if value is not None and not (0.0 <= value <= 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")


@dataclass(frozen=True)
class AgentConfig:
    """Construction parameters shared by every agent kind.

    ``learning_rate``, ``exploration`` and ``discount`` are ``None`` for kinds
    that do not learn.  ``tie_break`` selects how a greedy learner resolves
    equal action values: ``"random"`` (a counter-keyed draw) or ``"lowest"``.
    """

    seed: int = 0
    action_count: int = 2
    obs_count: int = 1
    learning_rate: Real | None = None
    exploration: float | None = None
    discount: float | None = None
    tie_break: str = "random"

    def __post_init__(self) -> None:
        if not 0 <= self.seed <= _MASK64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if self.action_count < 1 or self.obs_count < 1:
            raise ValueError("action_count and obs_count must be positive")
        if self.learning_rate is not None:
            if not math.isfinite(self.learning_rate) or self.learning_rate < 0:
                raise ValueError(f"learning_rate must be >= 0, got {self.learning_rate!r}")
        _check_probability("exploration", self.exploration)
        _check_probability("discount", self.discount)
        if self.tie_break not in ("random", "lowest"):
            raise ValueError(f"unknown tie_break {self.tie_break!r}")


class Agent(Protocol):
    def act(self, obs: int) -> int: ...

    def train(self, o_prev: int, a: int, r: float, o_next: int) -> None: ...


# kind name -> callable building an instance from its factory
AGENT_KINDS: dict[str, Callable[["AgentFactory"], Agent]] = {}


def register_agent_kind(name: str):
    def decorator(builder):
        AGENT_KINDS[name] = builder
        return builder

    return decorator


@dataclass(frozen=True)
class AgentFactory:
    """Creates fresh, untrained agent instances.

    This is the object handed to extended environments so that they can build
    shadow copies of the agent.  Wrapper kinds (such as the reality check)
    hold the wrapped factory in ``inner`` and mirror its config.
    """

    kind: str
    config: AgentConfig = field(default_factory=AgentConfig)
    params: tuple[tuple[str, Any], ...] = ()
    inner: AgentFactory | None = None

    def __call__(self) -> Agent:
        try:
            builder = AGENT_KINDS[self.kind]
        except KeyError:
            raise UnsupportedAgentError(f"unknown agent kind {self.kind!r}") from None
        return builder(self)

    def param(self, name: str, default: Any = None) -> Any:
        return dict(self.params).get(name, default)

    def replace_config(self, **changes: Any) -> AgentFactory:
        """Return a copy with ``config`` fields replaced, recursing into ``inner``."""
        inner = self.inner.replace_config(**changes) if self.inner is not None else None
        return dataclasses.replace(
            self, config=dataclasses.replace(self.config, **changes), inner=inner
        )

    def with_seed(self, seed: int) -> AgentFactory:
        return self.replace_config(seed=seed)

    def with_spaces(self, action_count: int, obs_count: int) -> AgentFactory:
        return self.replace_config(action_count=action_count, obs_count=obs_count)


@dataclass(frozen=True)
class History:
    """Alternating sequence x1 y1 x2 ... xn of percepts and actions.

    Stored as ``n`` percepts and ``n - 1`` actions, which makes the
    alternation (and starting/ending with a percept) hold by construction.
    """

    percepts: tuple[Percept, ...]
    actions: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "percepts", tuple(Percept(*p) for p in self.percepts))
        object.__setattr__(self, "actions", tuple(int(a) for a in self.actions))
        if not self.percepts:
            raise MalformedHistoryError("a history holds at least one percept")
        if len(self.actions) != len(self.percepts) - 1:
            raise MalformedHistoryError(
                f"{len(self.percepts)} percepts need {len(self.percepts) - 1} actions, "
                f"got {len(self.actions)}"
            )

    @classmethod
    def from_sequence(cls, seq: Sequence[Any]) -> History:
        """Build from the flat form ``[x1, y1, x2, ..., xn]``."""
        if len(seq) % 2 != 1:
            raise MalformedHistoryError("flat history must have odd length")
        return cls(tuple(seq[0::2]), tuple(seq[1::2]))

    def __len__(self) -> int:
        return 2 * len(self.percepts) - 1

    @property
    def turns(self) -> int:
        return len(self.percepts)

    def prefix(self, n: int) -> History:
        """The odd-length prefix ending with the ``n``-th percept."""
        if not 1 <= n <= len(self.percepts):
            raise ValueError(f"prefix length {n} out of range")
        return History(self.percepts[:n], self.actions[: n - 1])

    def transitions(self) -> Iterator[TrainStep]:
        # the reward accompanying an action is the one received after it
        for i, a in enumerate(self.actions):
            nxt = self.percepts[i + 1]
            yield TrainStep(self.percepts[i].obs, a, nxt.reward, nxt.obs)

    def reversed(self) -> History:
        return History(self.percepts[::-1], self.actions[::-1])

    def as_sequence(self) -> list[Any]:
        out: list[Any] = [self.percepts[0]]
        for a, p in zip(self.actions, self.percepts[1:]):
            out.extend((a, p))
        return out


@dataclass(frozen=True)
class RunRecord:
    """A completed agent-environment trajectory.

    ``initial_reward`` is the reward carried by the environment's opening
    percept (zero for every environment except
    ``prop3_fixture``); ``value`` adds it to ``total_reward``.
    """

    history: History
    per_step_rewards: tuple[float, ...]
    total_reward: float
    mean_reward_per_turn: float
    steps: int
    seed: int
    initial_reward: float = 0.0

    @property
    def value(self) -> float:
        return self.initial_reward + self.total_reward

    @property
    def actions(self) -> tuple[int, ...]:
        return self.history.actions


@dataclass(frozen=True)
class EnvFactory:
    """Named recipe for environment instances.

    ``build(agent_factory, seed)`` returns an object with ``start()`` and
    ``step(action)``.  Non-extended tasks ignore the agent factory.
    """

    name: str
    build: Callable[[AgentFactory, int], Any]
    observation_count: int
    action_count: int
    extended: bool = True
    adaptable: bool = False
    episodic: bool = False

    def __call__(self, agent_factory: AgentFactory, seed: int = 0) -> Any:
        return self.build(agent_factory, seed)


# --------------------------------------------------------------------------
# Interaction loop
# --------------------------------------------------------------------------


def _spaces_of(env_factory: Any) -> tuple[int, int]:
    return env_factory.observation_count, env_factory.action_count


class Interaction:
    """One agent instance stepping through one environment instance.

    ``run_interaction`` is the usual entry point; this class exists for
    callers that need the live agent or environment (episode bookkeeping,
    inspecting a reality-check wrapper, ...).
    """

    def __init__(self, agent_factory: AgentFactory, env_factory: Any, seed: int):
        obs_count, action_count = _spaces_of(env_factory)
        cfg = agent_factory.config
        if cfg.obs_count != obs_count or cfg.action_count != action_count:
            raise SpaceMismatchError(
                f"agent spaces (obs={cfg.obs_count}, actions={cfg.action_count}) do not match "
                f"environment spaces (obs={obs_count}, actions={action_count})"
            )
        self.obs_count = obs_count
        self.action_count = action_count
        self.seed = seed
        self.agent = agent_factory()
        self.env = env_factory(agent_factory, seed)
        self.obs: int | None = None
        self.initial_reward = 0.0

    def _check_obs(self, obs: int) -> int:
        if not 0 <= obs < self.obs_count:
            raise SpaceMismatchError(f"observation {obs} outside [0, {self.obs_count})")
        return obs

    def start(self) -> int:
        self.obs = self._check_obs(self.env.start())
        self.initial_reward = float(getattr(self.env, "initial_reward", 0.0))
        return self.obs

    def step(self) -> tuple[int, float, int]:
        o = self.obs
        a = self.agent.act(o)
        if not 0 <= a < self.action_count:
            raise SpaceMismatchError(f"action {a} outside [0, {self.action_count})")
        r, o_next = self.env.step(a)
        if not math.isfinite(r):
            raise NonFiniteRewardError(f"environment emitted reward {r!r}")
        self._check_obs(o_next)
        self.agent.train(o, a, r, o_next)
        self.obs = o_next
        return a, r, o_next


def run_interaction(
    agent_factory: AgentFactory, env_factory: Any, steps: int, seed: int
) -> RunRecord:
    """Run ``steps`` act/step/train rounds and return the full record.

    ``seed`` keys the environment; the agent uses the seed in its own config.
    The result is a pure function of the arguments.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    run = Interaction(agent_factory, env_factory, seed)
    o0 = run.start()
    percepts = [Percept(run.initial_reward, o0)]
    actions = []
    rewards = []
    for _ in range(steps):
        a, r, o = run.step()
        actions.append(a)
        rewards.append(float(r))
        percepts.append(Percept(float(r), o))
    total = math.fsum(rewards)
    return RunRecord(
        history=History(tuple(percepts), tuple(actions)),
        per_step_rewards=tuple(rewards),
        total_reward=total,
        mean_reward_per_turn=total / steps,
        steps=steps,
        seed=seed,
        initial_reward=run.initial_reward,
    )


# --------------------------------------------------------------------------
# Replay utilities (traditional equivalence, bounded)
# --------------------------------------------------------------------------


def replay_actions(agent_factory: AgentFactory, h: History) -> list[int]:
    """Actions a fresh instance takes at each percept of ``h``.

    Element ``i`` is the agent's action on the prefix ending at percept
    ``i + 1``; the instance is trained on the recorded transitions in between.
    """
    agent = agent_factory()
    out = []
    steps = list(h.transitions())
    for i, p in enumerate(h.percepts):
        out.append(agent.act(p.obs))
        if i < len(steps):
            agent.train(*steps[i])
    return out


def policy_on(agent_factory: AgentFactory, h: History) -> int:
    """The agent's action in response to the whole history ``h``."""
    return replay_actions(agent_factory, h)[-1]


def is_possible(agent_factory: AgentFactory, h: History) -> bool:
    """True iff every recorded action in ``h`` is the one the agent would take."""
    if not isinstance(h, History):
        raise MalformedHistoryError(f"expected a History, got {type(h).__name__}")
    taken = replay_actions(agent_factory, h)
    return all(taken[i] == y for i, y in enumerate(h.actions))


def traditionally_equivalent_on(
    f1: AgentFactory, f2: AgentFactory, histories: Iterable[History]
) -> bool:
    """Bounded check: f1 and f2 agree on every history in the set possible for f1."""
    for h in histories:
        taken = replay_actions(f1, h)
        if any(taken[i] != y for i, y in enumerate(h.actions)):
            continue
        if policy_on(f2, h) != taken[-1]:
            return False
    return True


def enumerate_histories(
    max_len: int,
    obs_count: int,
    action_count: int,
    rewards: Sequence[float] = (0.0,),
) -> Iterator[History]:
    """Every history of flat length <= ``max_len`` over the given alphabets."""
    percepts = [Percept(float(r), o) for r in rewards for o in range(obs_count)]
    n = 1
    while 2 * n - 1 <= max_len:
        for ps in itertools.product(percepts, repeat=n):
            for acts in itertools.product(range(action_count), repeat=n - 1):
                yield History(ps, acts)
        n += 1
