"""Cart-pole balancing task with a discretized observation space.

Dynamics follow the classic cart-pole benchmark (Barto, Sutton & Anderson
1983 as packaged in gym's ``CartPole-v0``): semi-implicit Euler with
tau = 0.02 s, a 200-step episode cap and +1 reward per step.  Observations
are binned into 3 x 3 x 6 x 6 = 324 tokens so that tabular agents can
use them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import derive_random, stream_key

GRAVITY = 9.8
CART_MASS = 1.0
POLE_MASS = 0.1
TOTAL_MASS = CART_MASS + POLE_MASS
HALF_LENGTH = 0.5
POLEMASS_LENGTH = POLE_MASS * HALF_LENGTH
FORCE_MAG = 10.0
TAU = 0.02
X_THRESHOLD = 2.4
THETA_THRESHOLD = 12 * 2 * math.pi / 360
MAX_EPISODE_STEPS = 200

BINS = (3, 3, 6, 6)
RANGES = (
    (-X_THRESHOLD, X_THRESHOLD),
    (-3.0, 3.0),
    (-THETA_THRESHOLD, THETA_THRESHOLD),
    (-3.5, 3.5),
)
OBS_COUNT = BINS[0] * BINS[1] * BINS[2] * BINS[3]
ACTION_COUNT = 2


@dataclass(frozen=True)
class CartPoleState:
    x: float = 0.0
    x_dot: float = 0.0
    theta: float = 0.0
    theta_dot: float = 0.0
    steps_in_episode: int = 0

    def __post_init__(self):
        for v in (self.x, self.x_dot, self.theta, self.theta_dot):
            if not math.isfinite(v):
                raise ValueError("cart-pole state components must be finite")


def cartpole_step(
    state: CartPoleState, action: int, *, zero_force: bool = False
) -> tuple[float, CartPoleState, bool]:
    if action not in (0, 1):
        raise ValueError(f"cart-pole action must be 0 or 1, got {action!r}")
    force = 0.0 if zero_force else (FORCE_MAG if action == 1 else -FORCE_MAG)
    x, x_dot, theta, theta_dot = state.x, state.x_dot, state.theta, state.theta_dot
    costheta = math.cos(theta)
    sintheta = math.sin(theta)
    temp = (force + POLEMASS_LENGTH * theta_dot * theta_dot * sintheta) / TOTAL_MASS
    thetaacc = (GRAVITY * sintheta - costheta * temp) / (
        HALF_LENGTH * (4.0 / 3.0 - POLE_MASS * costheta * costheta / TOTAL_MASS)
    )
    xacc = temp - POLEMASS_LENGTH * thetaacc * costheta / TOTAL_MASS
    # semi-implicit: velocities first, positions use the new velocities
    x_dot = x_dot + TAU * xacc
    x = x + TAU * x_dot
    theta_dot = theta_dot + TAU * thetaacc
    theta = theta + TAU * theta_dot
    steps = state.steps_in_episode + 1
    done = (
        x < -X_THRESHOLD
        or x > X_THRESHOLD
        or theta < -THETA_THRESHOLD
        or theta > THETA_THRESHOLD
        or steps >= MAX_EPISODE_STEPS
    )
    return 1.0, CartPoleState(x, x_dot, theta, theta_dot, steps), done


def cartpole_reset(seed: int, episode_counter: int) -> CartPoleState:
    key = stream_key(seed, "cartpole")
    base = episode_counter * 4
    x, x_dot, theta, theta_dot = (
        -0.05 + 0.1 * derive_random(key, base + i, 0) for i in range(4)
    )
    return CartPoleState(x, x_dot, theta, theta_dot, 0)


def _bin(value: float, lo: float, hi: float, n: int) -> int:
    idx = math.floor((value - lo) / (hi - lo) * n)
    return 0 if idx < 0 else (n - 1 if idx >= n else idx)


def bin_indices(state: CartPoleState) -> tuple[int, int, int, int]:
    values = (state.x, state.x_dot, state.theta, state.theta_dot)
    return tuple(_bin(v, lo, hi, n) for v, (lo, hi), n in zip(values, RANGES, BINS))


def discretize(state: CartPoleState) -> int:
    """Mixed-radix token of the state's bin indices; always < 324."""
    token = 0
    for idx, n in zip(bin_indices(state), BINS):
        token = token * n + idx
    return token


class CartPole:
    """Episodic cart-pole with a gym-style ``reset``/``step`` surface.

    The constructor takes only a seed; a non-extended task never sees the
    agent.  ``zero_force`` switches the actuator off (test use).
    """

    observation_count = OBS_COUNT
    action_count = ACTION_COUNT

    def __init__(self, seed: int = 0, *, zero_force: bool = False):
        self.seed = seed
        self.zero_force = zero_force
        self.episode = -1
        self.state: CartPoleState | None = None

    def reset(self) -> int:
        self.episode += 1
        self.state = cartpole_reset(self.seed, self.episode)
        return discretize(self.state)

    def step(self, action: int) -> tuple[int, float, bool]:
        if self.state is None:
            raise RuntimeError("reset() must be called before step()")
        reward, self.state, done = cartpole_step(self.state, action, zero_force=self.zero_force)
        return discretize(self.state), reward, done


class ContinuingTask:
    """Adapter exposing an episodic task through ``start``/``step``.

    Episodes are chained: when the task reports done, it is reset and the
    reset observation is emitted.  ``episode_done`` reports whether the most
    recent step ended an episode.
    """

    def __init__(self, task):
        self.task = task
        self.episode_done = False
        self.observation_count = task.observation_count
        self.action_count = task.action_count

    def start(self) -> int:
        return self.task.reset()

    def step(self, action: int) -> tuple[float, int]:
        obs, reward, done = self.task.step(action)
        self.episode_done = done
        if done:
            obs = self.task.reset()
        return reward, obs
