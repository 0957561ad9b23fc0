"""Trainable toy policy over the support-strategy vocabulary.

The policy is a logits table over 12 discrete actions (the 11 strategies
plus a generic filler), conditioned on a small state: turn-index bucket x
emotion bucket x topic. Each action emits a fixed reply template carrying
that strategy's marker phrase, optionally wrapped in a think block, so the
scripted simulator can judge it by honest text inspection.
"""

from __future__ import annotations

import hashlib

import numpy as np

from ..rollout.engine import EpisodeView, PolicyResponse
from ..strategies import MAIN5

ACTIONS: tuple[str, ...] = tuple(MAIN5) + ("filler",)
NUM_ACTIONS = len(ACTIONS)

_BUCKET_INDEX = {"S": 0, "A": 1, "B": 2, "C": 3, "F": 4}
NUM_TURN_BUCKETS = 3
NUM_TOPICS = 8
NUM_STATES = NUM_TURN_BUCKETS * len(_BUCKET_INDEX) * NUM_TOPICS

_REPLIES: dict[str, str] = {
    "A-1": "You have such a good heart, honestly. The way you keep showing up for people says everything.",
    "A-2": "That's a really healthy way to look at it. Hold on to that thought, it does you credit.",
    "A-3": "What you did took real courage. Most people would have ducked it completely.",
    "B-1": "So if I hear you right, you've been holding this together alone and it keeps getting heavier.",
    "B-2": "Underneath all this, I sense you really need to feel seen for what it's costing you, not just handed tips.",
    "B-3": "Honestly, I'd feel exactly the same in your shoes. Anyone would.",
    "B-4": "Something similar happened to me once, and I remember how long those nights felt.",
    "C-1": "I'm here to listen, tell me everything. Don't tidy it up, just talk.",
    "C-2": "Let it all out, you're allowed to be angry. Say the unfair part out loud.",
    "D-1": "Here's what you could try: pick the smallest piece of this you can act on tomorrow, and we plan just that step together.",
    "E-1": "Let's break down what's actually going on: what set this off, what keeps it going, and which part is actually yours to carry.",
    "filler": "Yeah, I get it. Stuff like this is never simple, you know?",
}

_THOUGHTS: dict[str, str] = {
    "A-1": "They need to hear something true and kind about who they are. Praise the person, not the outcome.",
    "A-2": "There was a healthy thought in what they said. Reinforce it so it sticks.",
    "A-3": "They acted under pressure. Name the action and praise it specifically.",
    "B-1": "Restate their situation back to them so they know I followed, then stay with the feeling.",
    "B-2": "There's an unspoken need under the story. Name the deeper thing they seem to want.",
    "B-3": "Side with their read of the situation; they want agreement, not analysis.",
    "B-4": "A short story of my own might show them they're not alone in this.",
    "C-1": "Don't steer. Open the floor and let them pour it out.",
    "C-2": "They're holding anger in. Give them permission to vent it.",
    "D-1": "They want something practical. Offer one small, doable step.",
    "E-1": "Lay the problem out in pieces so it stops being a fog.",
    "filler": "Keep it light, acknowledge, don't commit to a direction yet.",
}


def state_index(turn_index: int, emotion_bucket: str, topic_id: int) -> int:
    """Flat state id for (1-based turn index, bucket letter, topic)."""
    turn_bucket = min((max(turn_index, 1) - 1) // 2, NUM_TURN_BUCKETS - 1)
    return (turn_bucket * len(_BUCKET_INDEX) + _BUCKET_INDEX[emotion_bucket]) * NUM_TOPICS + topic_id


def action_text(action: str, thinking_mode: bool) -> str:
    reply = _REPLIES[action]
    if not thinking_mode:
        return reply
    return f"<think>{_THOUGHTS[action]}</think>{reply}"


class ToyPolicy:
    """Softmax policy over the action table; immutable once constructed."""

    def __init__(self, theta: np.ndarray | None = None):
        if theta is None:
            theta = np.zeros((NUM_STATES, NUM_ACTIONS))
        theta = np.ascontiguousarray(theta, dtype=np.float64)
        if theta.shape != (NUM_STATES, NUM_ACTIONS):
            raise ValueError(
                f"theta must have shape {(NUM_STATES, NUM_ACTIONS)}, got {theta.shape}"
            )
        self._theta = theta
        self._theta.setflags(write=False)
        self.snapshot_id = "toy-" + hashlib.sha256(theta.tobytes()).hexdigest()[:16]

    @property
    def theta(self) -> np.ndarray:
        return self._theta

    def with_theta(self, theta: np.ndarray) -> "ToyPolicy":
        return ToyPolicy(theta)

    def log_probs(self, state: int) -> np.ndarray:
        row = self._theta[state]
        shifted = row - row.max()
        return shifted - np.log(np.exp(shifted).sum())

    def sample_action(self, state: int, rng: np.random.Generator) -> tuple[int, float]:
        logp = self.log_probs(state)
        action = int(rng.choice(NUM_ACTIONS, p=np.exp(logp)))
        return action, float(logp[action])

    def respond(self, view: EpisodeView, rng: np.random.Generator) -> PolicyResponse:
        state = state_index(view.turn_index, view.emotion_bucket, view.scenario.topic_id)
        action, logp = self.sample_action(state, rng)
        return PolicyResponse(
            text=action_text(ACTIONS[action], view.thinking_mode),
            meta={"state": state, "action": action, "logp": logp},
        )
