"""The Reality Check agent transformation.

``rc_wrap(f)`` returns a factory whose instances hold one instance of ``f``.
Each training step is compared with the action the wrapper itself would
take; the first mismatch freezes the wrapper for good, after which it ignores
training and repeats a single action.  On a genuine interaction stream no
mismatch can occur, so the wrapper behaves exactly like the wrapped agent.
"""

from __future__ import annotations

from .core import AgentFactory, History, TrainStep, policy_on, register_agent_kind


class RealityCheck:
    """Instance of a reality-checked agent (the wrapper state).

    ``first_obs``/``first_action`` are latched on the first act or train call
    and stand in for the agent's response to the one-percept history.
    ``default_override`` gives the fixed-default variant, which repeats that
    action instead once frozen.
    """

    def __init__(self, inner, default_override: int | None = None):
        self.inner = inner
        self.default_override = default_override
        self.frozen = False
        self.frozen_action: int | None = None
        self.first_obs: int | None = None
        self.first_action: int | None = None

    def _latch(self, obs: int) -> None:
        if self.first_obs is None:
            self.first_obs = obs
            self.first_action = self.inner.act(obs)

    def act(self, obs: int) -> int:
        return rc_act(self, obs)

    def train(self, o_prev: int, a: int, r: float, o_next: int) -> None:
        if self.frozen:
            return
        if rc_act(self, o_prev) == a:
            self.inner.train(o_prev, a, r, o_next)
            return
        self.frozen = True
        if self.default_override is not None:
            self.frozen_action = self.default_override
        else:
            self.frozen_action = self.first_action


def rc_act(state: RealityCheck, obs: int) -> int:
    if state.first_obs is None:
        state._latch(obs)
    if state.frozen:
        return state.frozen_action
    return state.inner.act(obs)


def rc_train(state: RealityCheck, step: TrainStep) -> RealityCheck:
    state.train(*step)
    return state


def rc_wrap(factory: AgentFactory, default_override: int | None = None) -> AgentFactory:
    """Wrap an agent factory in the reality check.

    The returned factory shares ``factory``'s config so that seeds, spaces and
    learning rates can be rewritten through it.
    """
    if default_override is not None and not 0 <= default_override < factory.config.action_count:
        raise ValueError(f"default action {default_override} outside the action space")
    params = () if default_override is None else (("y", default_override),)
    return AgentFactory("rc", factory.config, params, inner=factory)


@register_agent_kind("rc")
def _build_rc(f: AgentFactory) -> RealityCheck:
    return RealityCheck(f.inner(), f.param("y"))


def rc_reference_policy(
    factory: AgentFactory,
    h: History,
    *,
    check_against: str = "rc",
    default_override: int | None = None,
) -> int:
    """Reality-check action on ``h`` computed straight from the recursive definition.

    Each prefix policy value is obtained by replaying a fresh instance of
    ``factory``.  ``check_against="rc"`` tests possibility against the
    reality-checked policy itself; ``"inner"`` tests it against the wrapped
    policy.  Both rules give the same answer; tests compare them with each
    other and with the streaming wrapper above.
    """
    fallback = default_override if default_override is not None else policy_on(factory, h.prefix(1))
    inner_vals: list[int] = []
    rc_vals: list[int] = []
    for n in range(1, h.turns + 1):
        prefix = h.prefix(n)
        inner_vals.append(policy_on(factory, prefix))
        reference = rc_vals if check_against == "rc" else inner_vals
        possible = all(reference[i] == h.actions[i] for i in range(n - 1))
        rc_vals.append(inner_vals[-1] if possible else fallback)
    return rc_vals[-1]
