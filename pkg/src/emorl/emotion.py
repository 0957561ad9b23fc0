"""Emotion state, verifiable reward computation, and outcome classification.

The simulated user carries a running emotion value (nominal range 0-100,
allowed to overshoot on the final accepted turn). The terminal value divided
by 100 is the episode reward; a think-format gate can zero it. Everything in
this module is a pure function over immutable values.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, NamedTuple

from .errors import ParseFailure

if TYPE_CHECKING:  # pragma: no cover
    from .rollout.transcripts import DialogueTranscript


class EmotionBucket(str, enum.Enum):
    """Discretized emotion level conditioning the simulated user's style.

    S ends the conversation on a high note, F ends it on a low one; A/B/C
    shade the reply tone from warm to cold.
    """

    S = "S"
    A = "A"
    B = "B"
    C = "C"
    F = "F"


class TerminationCause(str, enum.Enum):
    Success = "success"
    Failure = "failure"
    MaxTurns = "max_turns"
    FormatViolation = "format_violation"


@dataclass(frozen=True)
class EmotionState:
    """Running emotion value plus the per-turn delta history behind it."""

    initial_value: float = 50.0
    deltas: tuple[float, ...] = ()

    @property
    def value(self) -> float:
        return self.initial_value + sum(self.deltas)

    @property
    def bucket(self) -> EmotionBucket:
        return bucket_of(self.value)


@dataclass(frozen=True)
class RewardSpec:
    """Reward semantics for one run.

    ``format_gate`` should only be enabled for transcripts produced in
    thinking mode; with it on, any model turn that violates the think format
    zeroes the episode reward. ``failure_threshold_train`` is the early-stop
    level used while training (value <= threshold ends the episode);
    ``failure_threshold_eval`` is the strictly-below level that counts an
    episode as a Failure in benchmark statistics.
    """

    mode: str = "terminal"  # "terminal" | "per_turn"
    format_gate: bool = True
    success_threshold: float = 100.0
    failure_threshold_train: float = 0.0
    failure_threshold_eval: float = 10.0

    def __post_init__(self):
        if self.mode not in ("terminal", "per_turn"):
            raise ValueError(f"unknown reward mode: {self.mode!r}")
        if not (
            self.success_threshold
            > self.failure_threshold_eval
            >= self.failure_threshold_train
        ):
            raise ValueError(
                "thresholds must satisfy success > failure_eval >= failure_train, "
                f"got {self.success_threshold} / {self.failure_threshold_eval} / "
                f"{self.failure_threshold_train}"
            )


def bucket_of(value: float) -> EmotionBucket:
    """Map an emotion value to its bucket.

    Boundary values land in the higher band: 100 -> S, 70 -> A, 40 -> B,
    10 -> C.
    """
    if not math.isfinite(value):
        raise ValueError(f"emotion value must be finite, got {value!r}")
    if value >= 100:
        return EmotionBucket.S
    if value >= 70:
        return EmotionBucket.A
    if value >= 40:
        return EmotionBucket.B
    if value >= 10:
        return EmotionBucket.C
    return EmotionBucket.F


def apply_delta(state: EmotionState, delta: float, clamp: float = 10.0) -> EmotionState:
    """Apply a per-turn emotion change, clipped to [-clamp, +clamp].

    The clipped delta is what gets appended to the history, so
    ``state.value == initial + sum(deltas)`` holds exactly. The raw value has
    no floor or ceiling; termination logic deals with out-of-range values.
    """
    if clamp <= 0:
        raise ValueError(f"clamp must be positive, got {clamp}")
    if not math.isfinite(delta):
        raise ParseFailure(f"non-finite emotion delta: {delta!r}")
    clipped = max(-clamp, min(clamp, float(delta)))
    return EmotionState(state.initial_value, state.deltas + (clipped,))


class ThinkCheck(NamedTuple):
    valid: bool
    thought: str | None
    reply: str | None


_OPEN = "<think>"
_CLOSE = "</think>"


def check_think_format(text: str) -> ThinkCheck:
    """Verdict on the think-then-say scaffold, plus the split parts.

    Valid iff the text contains exactly one ``<think>`` block, opened before
    any reply content (only whitespace may precede it), properly closed, with
    a non-empty reply after ``</think>``. Never raises.
    """
    if not isinstance(text, str):
        return ThinkCheck(False, None, None)
    if text.count(_OPEN) != 1 or text.count(_CLOSE) != 1:
        return ThinkCheck(False, None, None)
    open_idx = text.find(_OPEN)
    close_idx = text.find(_CLOSE)
    if close_idx < open_idx:
        return ThinkCheck(False, None, None)
    if text[:open_idx].strip():
        return ThinkCheck(False, None, None)
    thought = text[open_idx + len(_OPEN) : close_idx]
    reply = text[close_idx + len(_CLOSE) :]
    if not reply.strip():
        return ThinkCheck(False, None, None)
    return ThinkCheck(True, thought.strip(), reply.strip())


def _format_violated(transcript: "DialogueTranscript") -> bool:
    return any(
        not check_think_format(turn.text).valid
        for turn in transcript.turns
        if turn.speaker == "model"
    )


def final_reward(transcript: "DialogueTranscript", spec: RewardSpec) -> float:
    """Terminal reward in [0, 1]: min(e_T, 100)/100, floored at 0.

    With the format gate on, any malformed model turn forces 0 regardless of
    the emotion score.
    """
    if not transcript.is_terminated:
        raise ValueError("final_reward requires a terminated transcript")
    if spec.format_gate and _format_violated(transcript):
        return 0.0
    return max(0.0, min(transcript.e_T, 100.0)) / 100.0


def per_turn_rewards(transcript: "DialogueTranscript") -> list[float]:
    """Emotion value immediately after each model turn (not normalized)."""
    values = [t.emotion_after for t in transcript.turns if t.speaker == "model"]
    if not values:
        raise ValueError("transcript has no completed model turns")
    return values


def classify_outcome(transcript: "DialogueTranscript", spec: RewardSpec) -> TerminationCause:
    """Eval-semantics outcome of a terminated transcript.

    Success requires e_T strictly above the success threshold; Failure
    requires e_T strictly below the eval failure threshold; FormatViolation
    wins whenever the gate fired.
    """
    if not transcript.is_terminated:
        raise ValueError("classify_outcome requires a terminated transcript")
    if spec.format_gate and _format_violated(transcript):
        return TerminationCause.FormatViolation
    if transcript.e_T > spec.success_threshold:
        return TerminationCause.Success
    if transcript.e_T < spec.failure_threshold_eval:
        return TerminationCause.Failure
    return TerminationCause.MaxTurns
