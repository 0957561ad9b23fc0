"""Behavioral probes of the scripted simulator presets.

Mirrors how the two simulator variants are compared: feed single-strategy
turns to each profile and measure the share of positive emotion changes
(acceptance rate), and sample mid-band replies to measure how often the
hidden need is spelled out (reveal rate). Probes draw off-goal strategies,
so acceptance reflects generic receptiveness rather than goal matching.
"""

from __future__ import annotations

from ..emotion import EmotionState
from ..scenarios import TOPIC_GOAL_STRATEGY, TOPICS, Scenario
from ..seeding import derive_seed
from ..strategies import MAIN5, MARKERS
from .profiles import make_profile
from .scripted import scripted_judge, scripted_reply


def _probe_scenario(topic_id: int, difficulty: str) -> Scenario:
    return Scenario(
        scenario_id=f"probe-{topic_id}",
        persona="Probe subject for simulator measurement.",
        background="A synthetic situation used only to probe reply behavior.",
        goal="Measure the simulator.",
        topic_id=topic_id,
        difficulty=difficulty,
    )


def probe_deltas(difficulty: str, n: int = 500, seed: int = 0) -> list[float]:
    """Emotion changes for n seeded single-strategy, off-goal probe turns."""
    codes = sorted(MAIN5)
    deltas = []
    for i in range(n):
        topic = derive_seed(seed, i, "topic") % len(TOPICS)
        goal = TOPIC_GOAL_STRATEGY[topic]
        off_goal = [c for c in codes if c != goal]
        strategy = off_goal[derive_seed(seed, i, "strategy") % len(off_goal)]
        profile = make_profile(difficulty, goal)
        turn = MARKERS[strategy][0].capitalize()
        judgment = scripted_judge(profile, turn, derive_seed(seed, i, "episode"), 1)
        deltas.append(judgment.change)
    return deltas


def probe_acceptance_rate(difficulty: str, n: int = 500, seed: int = 0) -> float:
    deltas = probe_deltas(difficulty, n=n, seed=seed)
    return sum(1 for d in deltas if d > 0) / len(deltas)


def probe_reveal_rate(difficulty: str, n: int = 500, seed: int = 0) -> float:
    """Share of mid-band replies that state the hidden intention outright."""
    revealed = 0
    for i in range(n):
        topic = derive_seed(seed, i, "topic") % len(TOPICS)
        scenario = _probe_scenario(topic, difficulty)
        profile = make_profile(difficulty, TOPIC_GOAL_STRATEGY[topic])
        state = EmotionState(50.0)  # bucket B: mid-band reply
        reply = scripted_reply(
            profile, scenario, state, derive_seed(seed, i, "episode"), 1
        )
        if scenario.hidden_intention in reply.response:
            revealed += 1
    return revealed / n
