"""Scenario definitions: persona, background, goal, and hidden intention.

A scenario is one YAML document. The hidden intention must be one of the 8
canonical need archetypes; the loader validates the topic id against that
table.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import yaml

from .errors import ConfigError

# The 8 hidden-intention archetypes, indexed by topic id.
TOPICS: tuple[str, ...] = (
    "You believe you bear no responsibility or fault in the situation, and you "
    "want the other person to agree that you are not at fault.",
    "You hope the other person will guide you to engage in self-reflection "
    "regarding the incident and help you achieve personal growth.",
    "You hope the other person will critically analyze the underlying problems "
    "in the incident.",
    "You hope the other person will deeply empathize with your feelings, rather "
    "than simply offering comfort.",
    "You want the other person to attentively listen to your emotional "
    "outpouring.",
    "You want to analyze the reasons behind the actions of other individuals "
    "involved in the incident.",
    "You hope to receive advice that can genuinely help you overcome your "
    "current difficulties.",
    "You hope the other person will sincerely praise your specific actions in "
    "the situation.",
)

DIFFICULTIES = ("vanilla", "challenging")

# Which support strategy satisfies each need archetype. Drives the scripted
# simulator's goal bonus; the toy policy has to learn this mapping per topic.
TOPIC_GOAL_STRATEGY: dict[int, str] = {
    0: "B-3",  # wants agreement -> agreeing self-disclosure
    1: "E-1",  # wants guided self-reflection -> issue analysis
    2: "E-1",  # wants critical analysis
    3: "B-2",  # wants deep empathy
    4: "C-1",  # wants to be listened to
    5: "E-1",  # wants others' motives analyzed
    6: "D-1",  # wants actionable advice
    7: "A-3",  # wants sincere praise of their actions
}


@dataclass(frozen=True)
class Scenario:
    scenario_id: str
    persona: str
    background: str
    goal: str
    topic_id: int
    difficulty: str = "vanilla"
    initial_emotion: float = 50.0

    def __post_init__(self):
        if not (0 <= self.topic_id < len(TOPICS)):
            raise ConfigError(
                f"scenario {self.scenario_id!r}: topic_id {self.topic_id} outside 0..{len(TOPICS) - 1}"
            )
        if self.difficulty not in DIFFICULTIES:
            raise ConfigError(
                f"scenario {self.scenario_id!r}: difficulty {self.difficulty!r} "
                f"not in {DIFFICULTIES}"
            )
        for name in ("persona", "background", "goal"):
            if not getattr(self, name).strip():
                raise ConfigError(f"scenario {self.scenario_id!r}: empty {name}")

    @property
    def hidden_intention(self) -> str:
        return TOPICS[self.topic_id]

    @property
    def goal_strategy(self) -> str:
        return TOPIC_GOAL_STRATEGY[self.topic_id]

    def opener(self) -> str:
        """The user's opening message, derived from the background."""
        first = self.background.strip().split(". ")[0].rstrip(".")
        return f"Hey... do you have a minute? {first}. I don't really know what to do."

    def to_dict(self) -> dict:
        return {
            "scenario_id": self.scenario_id,
            "persona": self.persona,
            "background": self.background,
            "goal": self.goal,
            "topic_id": self.topic_id,
            "difficulty": self.difficulty,
            "initial_emotion": self.initial_emotion,
        }


def scenario_from_dict(doc: dict, source: str = "<dict>") -> Scenario:
    try:
        return Scenario(
            scenario_id=str(doc["scenario_id"]),
            persona=str(doc["persona"]),
            background=str(doc["background"]),
            goal=str(doc["goal"]),
            topic_id=int(doc["topic_id"]),
            difficulty=str(doc.get("difficulty", "vanilla")),
            initial_emotion=float(doc.get("initial_emotion", 50.0)),
        )
    except KeyError as exc:
        raise ConfigError(f"{source}: missing scenario field {exc}") from exc


def load_scenario(path: Path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: scenario file must hold a mapping")
    return scenario_from_dict(doc, source=str(path))


def load_scenarios(path: Path) -> list[Scenario]:
    """Load a scenario set from a directory of YAML files or a single file.

    Directory contents are read in sorted name order so the set is stable.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"scenario path does not exist: {path}")
    files = sorted(path.glob("*.yaml")) if path.is_dir() else [path]
    if not files:
        raise ConfigError(f"no scenario files under {path}")
    scenarios = [load_scenario(f) for f in files]
    seen: set[str] = set()
    for sc in scenarios:
        if sc.scenario_id in seen:
            raise ConfigError(f"duplicate scenario_id {sc.scenario_id!r} in {path}")
        seen.add(sc.scenario_id)
    return scenarios


def save_scenario(scenario: Scenario, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(scenario.to_dict(), fh, sort_keys=True, allow_unicode=True)


def builtin_scenarios(difficulty: str | None = None) -> list[Scenario]:
    """The fixture scenario set shipped with the package."""
    root = Path(__file__).parent / "data" / "scenarios"
    scenarios = load_scenarios(root)
    if difficulty is not None:
        if difficulty not in DIFFICULTIES:
            raise ConfigError(f"unknown difficulty {difficulty!r}")
        scenarios = [
            Scenario(
                scenario_id=sc.scenario_id,
                persona=sc.persona,
                background=sc.background,
                goal=sc.goal,
                topic_id=sc.topic_id,
                difficulty=difficulty,
                initial_emotion=sc.initial_emotion,
            )
            for sc in scenarios
        ]
    return scenarios
