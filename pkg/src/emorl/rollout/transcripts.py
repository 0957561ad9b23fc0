"""Dialogue transcripts and their line-delimited file format (schema v1).

One JSON record per line, keys sorted, no timestamps: two runs with the same
seed produce byte-identical files. Loading is lenient by default (malformed
lines are reported and skipped) and strict on demand.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from ..emotion import TerminationCause

log = logging.getLogger(__name__)

SCHEMA_VERSION = "1"

# Why an episode stopped, as an event distinct from the classified outcome:
# a goodbye at emotion 7 stops the episode without the training failure rule
# ever firing.
STOP_RULES = ("format", "goodbye", "success_threshold", "failure_threshold", "max_turns")


@dataclass(frozen=True)
class Turn:
    speaker: str  # "user" | "model"
    text: str
    thought: str | None = None
    delta: float | None = None  # set on model turns: the judged emotion change
    emotion_after: float = 0.0
    meta: dict | None = None

    def to_dict(self) -> dict:
        return {
            "speaker": self.speaker,
            "text": self.text,
            "thought": self.thought,
            "delta": self.delta,
            "emotion_after": self.emotion_after,
            "meta": self.meta,
        }

    @staticmethod
    def from_dict(doc: dict) -> "Turn":
        return Turn(
            speaker=doc["speaker"],
            text=doc["text"],
            thought=doc.get("thought"),
            delta=doc.get("delta"),
            emotion_after=doc["emotion_after"],
            meta=doc.get("meta"),
        )


@dataclass(frozen=True)
class DialogueTranscript:
    scenario_id: str
    topic_id: int
    difficulty: str
    episode_seed: int
    policy_version: str
    turns: tuple[Turn, ...]
    status: str = "complete"  # "complete" | "aborted"
    stop_rule: str | None = None
    termination: TerminationCause | None = None
    e_T: float = 0.0
    reward: float | None = None
    abort_reason: str | None = None
    schema_version: str = SCHEMA_VERSION

    @property
    def is_terminated(self) -> bool:
        return self.status == "complete"

    @property
    def transcript_id(self) -> str:
        return f"{self.scenario_id}:{self.episode_seed}"

    def model_turns(self) -> list[Turn]:
        return [t for t in self.turns if t.speaker == "model"]

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "scenario_id": self.scenario_id,
            "topic_id": self.topic_id,
            "difficulty": self.difficulty,
            "episode_seed": self.episode_seed,
            "policy_version": self.policy_version,
            "status": self.status,
            "stop_rule": self.stop_rule,
            "termination": self.termination.value if self.termination else None,
            "e_T": self.e_T,
            "reward": self.reward,
            "abort_reason": self.abort_reason,
            "turns": [t.to_dict() for t in self.turns],
        }

    @staticmethod
    def from_dict(doc: dict) -> "DialogueTranscript":
        termination = doc.get("termination")
        return DialogueTranscript(
            scenario_id=doc["scenario_id"],
            topic_id=doc["topic_id"],
            difficulty=doc["difficulty"],
            episode_seed=doc["episode_seed"],
            policy_version=doc["policy_version"],
            turns=tuple(Turn.from_dict(t) for t in doc["turns"]),
            status=doc["status"],
            stop_rule=doc.get("stop_rule"),
            termination=TerminationCause(termination) if termination else None,
            e_T=doc["e_T"],
            reward=doc.get("reward"),
            abort_reason=doc.get("abort_reason"),
            schema_version=doc["schema_version"],
        )


def dumps_record(transcript: DialogueTranscript) -> str:
    return json.dumps(
        transcript.to_dict(), sort_keys=True, ensure_ascii=False, separators=(",", ":")
    )


def save_transcripts(path: Path, transcripts: Iterable[DialogueTranscript]) -> int:
    """Write one record per line; returns the record count."""
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for tr in transcripts:
            fh.write(dumps_record(tr))
            fh.write("\n")
            count += 1
    return count


def load_transcripts(path: Path, strict: bool = False) -> Iterator[DialogueTranscript]:
    """Stream records back; malformed lines are named by line number.

    In lenient mode (default) bad lines are logged and skipped; in strict
    mode the first bad line raises.
    """
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                yield DialogueTranscript.from_dict(json.loads(line))
            except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
                message = f"{path}: malformed transcript record on line {lineno}: {exc}"
                if strict:
                    raise ValueError(message) from exc
                log.warning("%s (skipped)", message)


def transcripts_digest(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
