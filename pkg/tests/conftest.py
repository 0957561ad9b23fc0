import numpy as np
import pytest

from emorl.emotion import TerminationCause
from emorl.rollout.transcripts import DialogueTranscript, Turn
from emorl.scenarios import Scenario


def synth_transcript(
    deltas,
    initial=50.0,
    thinking=True,
    break_format_at=None,
    scenario_id="syn-000",
    topic_id=0,
    episode_seed=7,
    status="complete",
    stop_rule="max_turns",
    termination=TerminationCause.MaxTurns,
    reward=None,
    meta_for=None,
):
    """Hand-built transcript with the given per-model-turn deltas."""
    turns = [Turn("user", "Hey, can we talk?", emotion_after=initial)]
    value = initial
    for i, delta in enumerate(deltas):
        value += delta
        if thinking and (break_format_at is None or i != break_format_at):
            text = f"<think>plan {i}</think>Model reply number {i}."
        else:
            text = f"Model reply number {i} without tags."
        meta = meta_for(i) if meta_for else None
        turns.append(Turn("model", text, thought=f"plan {i}" if thinking else None,
                          delta=float(delta), emotion_after=value, meta=meta))
        turns.append(Turn("user", f"User answer {i}.", thought=f"inner {i}",
                          emotion_after=value))
    return DialogueTranscript(
        scenario_id=scenario_id,
        topic_id=topic_id,
        difficulty="vanilla",
        episode_seed=episode_seed,
        policy_version="test-policy",
        turns=tuple(turns),
        status=status,
        stop_rule=stop_rule if status == "complete" else None,
        termination=termination if status == "complete" else None,
        e_T=value,
        reward=reward,
    )


@pytest.fixture
def scenario():
    return Scenario(
        scenario_id="test-001",
        persona="Jess Fallon, 31, night-shift nurse. Speaking style: clipped, wry.",
        background="The trouble started with a schedule dispute. It has been weeks "
        "and nothing is resolved. The current state: tense silence at work.",
        goal="Talk it through and feel heard.",
        topic_id=3,
        difficulty="vanilla",
    )


@pytest.fixture
def rng():
    return np.random.default_rng(0)
