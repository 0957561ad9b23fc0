"""Five-dimension capability rubric scoring via an LLM judge."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass

from ..errors import ParseFailure
from ..gateway import ChatRequest
from ..simulation.prompts import format_dialog, render

log = logging.getLogger(__name__)

CAPABILITY_DIMENSIONS = (
    "empathic_depth",
    "core_insight",
    "solution_crafting",
    "style_adaptability",
    "dialogue_guidance",
)

_SCORE_RE = re.compile(r"(?im)^[^\w\n]*Score\s*[:：]\s*\[?\s*(\d+)")


@dataclass(frozen=True)
class CapabilityScores:
    empathic_depth: int
    core_insight: int
    solution_crafting: int
    style_adaptability: int
    dialogue_guidance: int

    def as_dict(self) -> dict[str, int]:
        return {dim: getattr(self, dim) for dim in CAPABILITY_DIMENSIONS}


def parse_capability_output(raw: str) -> CapabilityScores:
    """Read five Score lines in rubric order; anything else is a failure.

    The judge must emit exactly five scores, each in 1..5.
    """
    if not isinstance(raw, str):
        raise ParseFailure("capability output is not text", raw=repr(raw))
    values = [int(m.group(1)) for m in _SCORE_RE.finditer(raw)]
    if len(values) != 5:
        raise ParseFailure(
            f"expected 5 Score lines, found {len(values)}", raw=raw
        )
    for v in values:
        if not 1 <= v <= 5:
            raise ParseFailure(f"capability score {v} outside 1..5", raw=raw)
    return CapabilityScores(*values)


def capability_scores(
    transcript,
    gateway,
    judge_profile: str = "judge",
    max_retries: int = 3,
) -> CapabilityScores:
    """Score one dialogue against the rubric; ParseFailure if unusable."""
    prompt = render(
        "capability_judge",
        history=format_dialog(transcript.turns, model_label="Model", user_label="User"),
    )
    last: ParseFailure | None = None
    for attempt in range(max_retries):
        raw = gateway.complete(
            ChatRequest(
                profile=judge_profile,
                messages=({"role": "user", "content": prompt},),
                tag=f"capability:{transcript.transcript_id}:{attempt}",
            )
        )
        try:
            return parse_capability_output(raw)
        except ParseFailure as exc:
            log.warning("capability parse failure for %s (attempt %d): %s",
                        transcript.transcript_id, attempt + 1, exc)
            last = exc
    raise last


def score_transcripts(transcripts, gateway, judge_profile: str = "judge"):
    """(transcript_id, scores) pairs; unparsable transcripts are excluded."""
    results = []
    excluded = 0
    for tr in transcripts:
        if tr.status != "complete":
            excluded += 1
            continue
        try:
            results.append((tr.transcript_id, capability_scores(tr, gateway, judge_profile)))
        except ParseFailure:
            excluded += 1
    return results, excluded
