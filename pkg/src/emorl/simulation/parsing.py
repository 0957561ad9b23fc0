"""Output types of the user simulator and the parsers that produce them.

Both parsers are total: they either return a value or raise
:class:`ParseFailure`, never anything else, no matter what text comes in.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import ParseFailure

DEFAULT_FAREWELLS: tuple[str, ...] = ("goodbye", "bye-bye")

_EMOTION_LABELS = ("content", "targetcompletion", "activity", "analyze", "change")

# Labels may sit at line starts with optional markdown decoration and use an
# ASCII or fullwidth colon.
_EMOTION_LABEL_RE = re.compile(
    r"(?im)^[^\w\n]*(content|targetcompletion|activity|analyze|change)\s*[:：]"
)
_REPLY_LABEL_RE = re.compile(r"(?im)^[^\w\n]*(thinking|response)\s*[:：]")
_NUMBER_RE = re.compile(r"[-+]?\d+(?:\.\d+)?")


@dataclass(frozen=True)
class EmotionJudgment:
    """One emotion-estimation step: four analysis texts plus the delta."""

    content: str
    target_completion: str
    activity: str
    analyze: str
    change: float


@dataclass(frozen=True)
class UserReply:
    thinking: str
    response: str
    said_goodbye: bool


def _split_sections(raw: str, label_re: re.Pattern) -> dict[str, str]:
    """Text following each recognized label, keyed by lowercased label.

    When a label repeats, the first occurrence wins.
    """
    matches = list(label_re.finditer(raw))
    sections: dict[str, str] = {}
    for i, m in enumerate(matches):
        label = m.group(1).lower()
        end = matches[i + 1].start() if i + 1 < len(matches) else len(raw)
        if label not in sections:
            sections[label] = raw[m.end() : end].strip()
    return sections


def parse_emotion_output(raw: str) -> EmotionJudgment:
    """Parse the five-section emotion-estimation output.

    The Change section must contain a parsable signed number; the first one
    found is taken (judges tend to wrap it in prose or brackets). Missing
    text sections degrade to empty strings.
    """
    if not isinstance(raw, str):
        raise ParseFailure("emotion output is not text", raw=repr(raw))
    sections = _split_sections(raw, _EMOTION_LABEL_RE)
    change_text = sections.get("change")
    if change_text is None:
        raise ParseFailure("no Change section in emotion output", raw=raw)
    number = _NUMBER_RE.search(change_text)
    if number is None:
        raise ParseFailure("no parsable number in Change section", raw=raw)
    return EmotionJudgment(
        content=sections.get("content", ""),
        target_completion=sections.get("targetcompletion", ""),
        activity=sections.get("activity", ""),
        analyze=sections.get("analyze", ""),
        change=float(number.group(0)),
    )


def contains_farewell(text: str, farewell_markers: tuple[str, ...] = DEFAULT_FAREWELLS) -> bool:
    lowered = text.lower()
    return any(marker in lowered for marker in farewell_markers)


def parse_reply_output(
    raw: str, farewell_markers: tuple[str, ...] = DEFAULT_FAREWELLS
) -> UserReply:
    """Parse the Thinking/Response reply output.

    Label-free text is treated entirely as the response. An empty response
    after stripping is a failure: the simulated user always says something.
    """
    if not isinstance(raw, str):
        raise ParseFailure("reply output is not text", raw=repr(raw))
    sections = _split_sections(raw, _REPLY_LABEL_RE)
    if "response" in sections:
        thinking = sections.get("thinking", "")
        response = sections["response"]
    else:
        thinking = sections.get("thinking", "")
        response = "" if "thinking" in sections else raw.strip()
    if not response.strip():
        raise ParseFailure("empty user response", raw=raw)
    return UserReply(
        thinking=thinking,
        response=response.strip(),
        said_goodbye=contains_farewell(response, farewell_markers),
    )
