"""emorl: reinforcement learning with verifiable emotion rewards from a
simulated user, plus the evaluation suite that goes with it."""

from .emotion import (
    EmotionBucket,
    EmotionState,
    RewardSpec,
    TerminationCause,
    apply_delta,
    bucket_of,
    check_think_format,
    classify_outcome,
    final_reward,
    per_turn_rewards,
)
from .errors import (
    ConfigError,
    EmorlError,
    EpisodeAbort,
    ParseFailure,
    PermanentFailure,
    ReplayMiss,
    StaleBatchError,
    TransportFailure,
)
from .scenarios import Scenario, builtin_scenarios, load_scenarios

__version__ = "0.1.0"

__all__ = [
    "EmotionBucket",
    "EmotionState",
    "RewardSpec",
    "TerminationCause",
    "apply_delta",
    "bucket_of",
    "check_think_format",
    "classify_outcome",
    "final_reward",
    "per_turn_rewards",
    "ConfigError",
    "EmorlError",
    "EpisodeAbort",
    "ParseFailure",
    "PermanentFailure",
    "ReplayMiss",
    "StaleBatchError",
    "TransportFailure",
    "Scenario",
    "builtin_scenarios",
    "load_scenarios",
    "__version__",
]
