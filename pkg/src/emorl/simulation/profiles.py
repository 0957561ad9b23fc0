"""Deterministic affect profiles for the scripted user simulator.

A profile says how the simulated user reacts to each support strategy:
a mean emotion delta when the strategy lands, an acceptance probability,
a penalty for turns that offer nothing recognizable, and a bonus when the
reply hits the strategy the user secretly needs. Two shipped presets differ
in receptiveness: the vanilla user accepts roughly half of off-goal
strategies, the challenging one roughly a third, and the challenging user
also reveals its needs less often.

The preset numbers are calibrated so that, measured with the shipped probe
procedure, the two profiles land near 52.4% / 33.1% acceptance and
78.6% / 63.6% reveal proportions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ConfigError
from ..scenarios import Scenario
from ..strategies import MAIN5

# Off-goal response table: strategy -> (delta_mean, acceptance).
# Advice and analysis read as cold when they are not what the user needs.
_VANILLA_BASE: dict[str, tuple[float, float]] = {
    "A-1": (2.0, 0.74),
    "A-2": (2.0, 0.64),
    "A-3": (2.5, 0.76),
    "B-1": (1.5, 0.68),
    "B-2": (3.0, 0.72),
    "B-3": (1.5, 0.60),
    "B-4": (1.0, 0.51),
    "C-1": (1.5, 0.62),
    "C-2": (1.5, 0.53),
    "D-1": (-2.0, 0.40),
    "E-1": (-2.0, 0.35),
}

# Receptiveness scaling of the challenging user relative to vanilla.
_CHALLENGING_ACCEPT_SCALE = 0.63

# When the reply hits the hidden need, the user is far more receptive.
_GOAL_RESPONSE = {"vanilla": (3.0, 0.85), "challenging": (3.0, 0.536)}
_GOAL_BONUS = {"vanilla": 6.5, "challenging": 6.5}
_REVEAL_LEVEL = {"vanilla": 0.786, "challenging": 0.636}

# Penalty applied per strategy miss and to strategy-free turns in the shipped
# training profiles (a bare profile defaults to the milder -2).
_TRAINING_MISS_PENALTY = -6.5


@dataclass(frozen=True)
class ScriptedAffectProfile:
    """Parameters of one simulated user's deterministic affect dynamics."""

    strategy_response: dict[str, tuple[float, float]]
    goal_strategy: str | None = None
    goal_bonus: float = 6.5
    miss_penalty: float = -2.0
    verbosity_penalty: float = 0.1
    length_cap: int = 60
    reveal_level: float = 0.786
    delta_clamp: float = 10.0
    name: str = "custom"

    def __post_init__(self):
        for code, (delta, acc) in self.strategy_response.items():
            if abs(delta) > self.delta_clamp:
                raise ConfigError(
                    f"profile {self.name!r}: |delta_mean({code})| exceeds the clamp"
                )
            if not 0.0 <= acc <= 1.0:
                raise ConfigError(
                    f"profile {self.name!r}: acceptance({code}) outside [0, 1]"
                )
        if not 0.0 <= self.reveal_level <= 1.0:
            raise ConfigError(f"profile {self.name!r}: reveal_level outside [0, 1]")
        if self.miss_penalty > 0:
            raise ConfigError(f"profile {self.name!r}: miss_penalty must be <= 0")


def base_table(difficulty: str) -> dict[str, tuple[float, float]]:
    if difficulty == "vanilla":
        return dict(_VANILLA_BASE)
    if difficulty == "challenging":
        return {
            code: (delta, acc * _CHALLENGING_ACCEPT_SCALE)
            for code, (delta, acc) in _VANILLA_BASE.items()
        }
    raise ConfigError(f"unknown difficulty {difficulty!r}")


def make_profile(difficulty: str, goal_strategy: str | None) -> ScriptedAffectProfile:
    """Build a shipped preset, optionally bound to a goal strategy."""
    table = base_table(difficulty)
    if goal_strategy is not None:
        if goal_strategy not in MAIN5:
            raise ConfigError(f"unknown goal strategy {goal_strategy!r}")
        table[goal_strategy] = _GOAL_RESPONSE[difficulty]
    return ScriptedAffectProfile(
        strategy_response=table,
        goal_strategy=goal_strategy,
        goal_bonus=_GOAL_BONUS[difficulty],
        miss_penalty=_TRAINING_MISS_PENALTY,
        reveal_level=_REVEAL_LEVEL[difficulty],
        name=difficulty,
    )


def profile_for(scenario: Scenario) -> ScriptedAffectProfile:
    """The preset profile a scenario implies (difficulty + goal strategy)."""
    return make_profile(scenario.difficulty, scenario.goal_strategy)
