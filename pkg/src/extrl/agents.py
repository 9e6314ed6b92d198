"""Baseline agents: constant, uniform-random and tabular Q-learning.

Every agent here draws randomness from ``derive_random(seed, train_counter,
obs)``.  ``act`` therefore never advances any state, and two instances that
received the same train calls return the same action for the same
observation.
"""

from __future__ import annotations

import dataclasses
from numbers import Real

import numpy as np

from .core import (
    AgentConfig,
    AgentFactory,
    TrainStep,
    UnsupportedAgentError,
    derive_random,
    register_agent_kind,
    stream_key,
)

DEFAULT_LEARNING_RATE = 0.1
DEFAULT_DISCOUNT = 0.95
DEFAULT_EXPLORATION = 0.05


def act_constant(k: int, obs: int) -> int:
    return k


def act_random(config: AgentConfig, train_counter: int, obs: int) -> int:
    u = derive_random(config.seed, train_counter, obs)
    return min(int(u * config.action_count), config.action_count - 1)


class ConstantAgent:
    def __init__(self, k: int, config: AgentConfig):
        if not 0 <= k < config.action_count:
            raise ValueError(f"constant action {k} outside the action space")
        self.k = k
        self.config = config
        self.train_counter = 0

    def act(self, obs: int) -> int:
        return self.k

    def train(self, o_prev, a, r, o_next) -> None:
        self.train_counter += 1


class RandomAgent:
    def __init__(self, config: AgentConfig):
        self.config = config
        self.train_counter = 0

    def act(self, obs: int) -> int:
        return act_random(self.config, self.train_counter, obs)

    def train(self, o_prev, a, r, o_next) -> None:
        self.train_counter += 1


class QTable:
    """Epsilon-greedy tabular Q-learner.

    Values are held as a list of per-observation rows; plain Python floats
    are much cheaper than numpy scalars for one-entry updates.
    """

    def __init__(self, config: AgentConfig):
        self.config = config
        self.learning_rate = float(config.learning_rate)
        self.discount = float(config.discount)
        self.exploration = float(config.exploration)
        self.train_counter = 0
        self._rows = [[0.0] * config.action_count for _ in range(config.obs_count)]
        self._tie_seed = stream_key(config.seed, "tie-break")
        self._random_ties = config.tie_break == "random"

    @property
    def values(self) -> np.ndarray:
        return np.array(self._rows, dtype=float)

    def set_value(self, obs: int, action: int, value: float) -> None:
        self._rows[obs][action] = float(value)

    def act(self, obs: int) -> int:
        return q_act(self, obs)

    def train(self, o_prev: int, a: int, r: float, o_next: int) -> None:
        row = self._rows[o_prev]
        target = r + self.discount * max(self._rows[o_next])
        row[a] += self.learning_rate * (target - row[a])
        self.train_counter += 1


def q_act(table: QTable, obs: int) -> int:
    n = table.config.action_count
    eps = table.exploration
    u = derive_random(table.config.seed, table.train_counter, obs)
    if u < eps:
        # u is uniform on [0, eps) here, so rescaling gives a uniform action
        return min(int(u / eps * n), n - 1)
    row = table._rows[obs]
    best = max(row)
    first = row.index(best)
    if not table._random_ties:
        return first
    ties = [a for a in range(first, n) if row[a] == best]
    if len(ties) == 1:
        return first
    v = derive_random(table._tie_seed, table.train_counter, obs)
    return ties[min(int(v * len(ties)), len(ties) - 1)]


def q_train(table: QTable, step: TrainStep) -> QTable:
    """values[o, a] += lr * (r + discount * max_a' values[o', a'] - values[o, a])."""
    table.train(*step)
    return table


class Prop3Twin:
    """Always action 0, except action 1 on exactly the history <(0,0), 1, (0,0)>."""

    _TRIGGER = (0, 1, 0.0, 0)

    def __init__(self, config: AgentConfig):
        self.config = config
        self._seen: list[tuple] = []

    def act(self, obs: int) -> int:
        if obs == 0 and len(self._seen) == 1 and self._seen[0] == self._TRIGGER:
            return 1
        return 0

    def train(self, o_prev, a, r, o_next) -> None:
        if len(self._seen) < 2:
            self._seen.append((o_prev, a, float(r), o_next))


@register_agent_kind("constant")
def _build_constant(f: AgentFactory) -> ConstantAgent:
    return ConstantAgent(f.param("k", 0), f.config)


@register_agent_kind("random")
def _build_random(f: AgentFactory) -> RandomAgent:
    return RandomAgent(f.config)


@register_agent_kind("q")
def _build_q(f: AgentFactory) -> QTable:
    return QTable(f.config)


@register_agent_kind("prop3_twin")
def _build_prop3_twin(f: AgentFactory) -> Prop3Twin:
    return Prop3Twin(f.config)


# --------------------------------------------------------------------------
# factory helpers
# --------------------------------------------------------------------------


def constant(k: int = 0, *, action_count: int = 2, obs_count: int = 1, seed: int = 0) -> AgentFactory:
    cfg = AgentConfig(seed=seed, action_count=action_count, obs_count=obs_count)
    return AgentFactory("constant", cfg, (("k", k),))


def random_agent(*, action_count: int = 2, obs_count: int = 1, seed: int = 0) -> AgentFactory:
    return AgentFactory("random", AgentConfig(seed=seed, action_count=action_count, obs_count=obs_count))


def q_learner(
    learning_rate: Real = DEFAULT_LEARNING_RATE,
    discount: float = DEFAULT_DISCOUNT,
    exploration: float = DEFAULT_EXPLORATION,
    *,
    action_count: int = 2,
    obs_count: int = 1,
    seed: int = 0,
    tie_break: str = "random",
) -> AgentFactory:
    cfg = AgentConfig(
        seed=seed,
        action_count=action_count,
        obs_count=obs_count,
        learning_rate=learning_rate,
        exploration=exploration,
        discount=discount,
        tie_break=tie_break,
    )
    return AgentFactory("q", cfg)


def prop3_twin(*, seed: int = 0) -> AgentFactory:
    return AgentFactory("prop3_twin", AgentConfig(seed=seed, action_count=2, obs_count=1))


def get_learning_rate(factory: AgentFactory) -> Real:
    if factory.inner is not None:
        return get_learning_rate(factory.inner)
    if factory.config.learning_rate is None:
        raise UnsupportedAgentError(f"agent kind {factory.kind!r} has no learning rate")
    return factory.config.learning_rate


def replace_learning_rate(factory: AgentFactory, l: Real) -> AgentFactory:
    """Copy of ``factory`` whose agents use learning rate ``l``.

    Wrapper kinds are rebuilt around the modified inner factory.
    """
    if l < 0:
        raise ValueError(f"learning rate must be >= 0, got {l!r}")
    if factory.inner is not None:
        inner = replace_learning_rate(factory.inner, l)
        return dataclasses.replace(factory, inner=inner, config=inner.config)
    if factory.config.learning_rate is None:
        raise UnsupportedAgentError(f"agent kind {factory.kind!r} has no learning rate")
    return dataclasses.replace(
        factory, config=dataclasses.replace(factory.config, learning_rate=l)
    )
