"""Emotion-and-need expression level of a simulated user.

Each probe asks a judge how well the user's inner thoughts and actual reply
line up; the metric is the mean overall consistency score divided by 10.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass

from ..errors import ParseFailure
from ..gateway import ChatRequest
from ..simulation.prompts import render

log = logging.getLogger(__name__)

_SUMMARY_RE = re.compile(r"(?im)^[^\w\n]*Summary\s+Score\s*[:：]\s*\[?\s*(\d+(?:\.\d+)?)")
_OVERALL_RE = re.compile(r"(?im)^[^\w\n]*\**\s*Overall")


@dataclass(frozen=True)
class ExpressionJudgment:
    dimension_scores: tuple[float, ...]
    overall: float


def parse_expression_output(raw: str) -> ExpressionJudgment:
    """Parse the three per-dimension Summary Scores plus the Overall one.

    The Overall section is required; its Summary Score is the probe's value.
    """
    if not isinstance(raw, str):
        raise ParseFailure("expression output is not text", raw=repr(raw))
    overall_match = _OVERALL_RE.search(raw)
    if overall_match is None:
        raise ParseFailure("no Overall section in expression output", raw=raw)
    before = raw[: overall_match.start()]
    after = raw[overall_match.start() :]
    dims = [float(m.group(1)) for m in _SUMMARY_RE.finditer(before)]
    overall_scores = [float(m.group(1)) for m in _SUMMARY_RE.finditer(after)]
    if not overall_scores:
        raise ParseFailure("Overall section has no Summary Score", raw=raw)
    overall = overall_scores[0]
    for v in dims + [overall]:
        if not 0 <= v <= 10:
            raise ParseFailure(f"summary score {v} outside 0..10", raw=raw)
    return ExpressionJudgment(dimension_scores=tuple(dims), overall=overall)


def expression_level(
    probes,
    gateway,
    judge_profile: str = "judge",
) -> tuple[float | None, int]:
    """Mean overall score / 10 over (need, thought, reply) probes.

    Returns (level, dropped); probes whose judge output cannot be parsed are
    dropped and counted. With every probe dropped the level is undefined.
    """
    totals = []
    dropped = 0
    for i, (need, thought, reply) in enumerate(probes):
        prompt = render("expression_judge", need=need, thought=thought, reply=reply)
        raw = gateway.complete(
            ChatRequest(
                profile=judge_profile,
                messages=({"role": "user", "content": prompt},),
                tag=f"expression:{i}",
            )
        )
        try:
            totals.append(parse_expression_output(raw).overall)
        except ParseFailure as exc:
            log.warning("expression probe %d dropped: %s", i, exc)
            dropped += 1
    if not totals:
        return None, dropped
    return sum(totals) / len(totals) / 10.0, dropped
