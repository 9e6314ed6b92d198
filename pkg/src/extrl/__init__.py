"""Extended reinforcement-learning environments, agents and the reality check."""

from .core import (
    AgentConfig,
    AgentFactory,
    EnvFactory,
    ExtRLError,
    History,
    Interaction,
    MalformedHistoryError,
    NonFiniteRewardError,
    Percept,
    RunRecord,
    SpaceMismatchError,
    TrainStep,
    UnsupportedAgentError,
    derive_random,
    enumerate_histories,
    is_possible,
    policy_on,
    run_interaction,
    traditionally_equivalent_on,
)
from .agents import (
    constant,
    get_learning_rate,
    prop3_twin,
    q_learner,
    random_agent,
    replace_learning_rate,
)
from .reality_check import RealityCheck, rc_wrap
from .combine import CombinedEnv, check_adaptable, env_factory

__version__ = "0.1.0"
