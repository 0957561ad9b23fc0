"""Strategy annotation of model turns.

Two annotators: the keyword annotator applies the marker lexicon offline
(what the scripted environment speaks), the LLM annotator renders the
judge prompt per turn and reads ``<Strategy>...</Strategy>`` spans out of
its answer. Either way an annotation carries exactly one schema.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path

from ..emotion import check_think_format
from ..errors import ParseFailure
from ..gateway import ChatRequest
from ..simulation.prompts import render
from ..strategies import map_to_main5, validate_schema, detect_strategies

log = logging.getLogger(__name__)

_SPAN_RE = re.compile(r"<Strategy>(.*?)</Strategy>", re.IGNORECASE | re.DOTALL)
_OPEN_TAG_RE = re.compile(r"<Strategy>", re.IGNORECASE)
_CODE_RE = re.compile(r"\(([A-G])\s*-\s*(\d)\)")


@dataclass(frozen=True)
class AnnotatedTurn:
    transcript_id: str
    turn_index: int
    schema: str
    strategies: frozenset[str]
    emo_change: float

    def to_dict(self) -> dict:
        return {
            "transcript_id": self.transcript_id,
            "turn_index": self.turn_index,
            "schema": self.schema,
            "strategies": sorted(self.strategies),
            "emo_change": self.emo_change,
        }

    @staticmethod
    def from_dict(doc: dict) -> "AnnotatedTurn":
        return AnnotatedTurn(
            transcript_id=doc["transcript_id"],
            turn_index=doc["turn_index"],
            schema=doc["schema"],
            strategies=frozenset(doc["strategies"]),
            emo_change=doc["emo_change"],
        )


def parse_strategy_labels(raw: str, schema: str = "appendix7") -> set[str]:
    """Codes listed inside ``<Strategy>`` spans, filtered to the schema.

    Unknown codes are dropped with a warning. No spans at all is a valid
    empty annotation, but an opened span that never closes is malformed.
    """
    if not isinstance(raw, str):
        raise ParseFailure("strategy output is not text", raw=repr(raw))
    known = validate_schema(schema)
    spans = _SPAN_RE.findall(raw)
    if not spans and len(_OPEN_TAG_RE.findall(raw)) > 0:
        raise ParseFailure("unclosed <Strategy> span", raw=raw)
    codes: set[str] = set()
    for span in spans:
        for letter, digit in _CODE_RE.findall(span):
            code = f"{letter}-{digit}"
            if code in known:
                codes.add(code)
            else:
                log.warning("dropping unknown strategy label %s for schema %s", code, schema)
    return codes


def _visible(text: str) -> str:
    chk = check_think_format(text)
    return chk.reply if chk.valid else text


def annotate_transcripts(
    transcripts,
    schema: str = "main5",
    annotator: str = "keyword",
    gateway=None,
    judge_profile: str = "judge",
    max_retries: int = 3,
    to_main5: bool | None = None,
) -> tuple[list[AnnotatedTurn], int]:
    """Annotate every judged model turn; returns (annotations, skipped).

    ``skipped`` counts turns left unannotated after LLM retries; those turns
    are excluded from downstream denominators rather than recorded empty.
    With the LLM annotator the judge speaks the 7-group taxonomy; asking for
    main5 output projects its labels through the configured mapping.
    """
    validate_schema(schema)
    if annotator not in ("keyword", "llm"):
        raise ValueError(f"unknown annotator {annotator!r}")
    if annotator == "llm" and gateway is None:
        raise ValueError("llm annotator requires a gateway")
    if to_main5 is None:
        to_main5 = schema == "main5"

    annotations: list[AnnotatedTurn] = []
    skipped = 0
    for tr in transcripts:
        if tr.status != "complete":
            continue
        model_index = 0
        for i, turn in enumerate(tr.turns):
            if turn.speaker != "model" or turn.delta is None:
                continue
            model_index += 1
            if annotator == "keyword":
                strategies = detect_strategies(_visible(turn.text))
            else:
                strategies = _llm_annotate(
                    gateway, judge_profile, _visible(turn.text),
                    f"{tr.transcript_id}:{model_index}", max_retries,
                )
                if strategies is None:
                    skipped += 1
                    continue
                if to_main5:
                    strategies = map_to_main5(strategies)
            annotations.append(
                AnnotatedTurn(
                    transcript_id=tr.transcript_id,
                    turn_index=i,
                    schema=schema,
                    strategies=frozenset(strategies),
                    emo_change=float(turn.delta),
                )
            )
    return annotations, skipped


def _llm_annotate(gateway, profile, text, tag_base, max_retries):
    prompt = render("strategy_annotation", dialog_history=f"Supporter: {text}")
    for attempt in range(max_retries):
        raw = gateway.complete(
            ChatRequest(
                profile=profile,
                messages=({"role": "user", "content": prompt},),
                tag=f"annotate:{tag_base}:{attempt}",
            )
        )
        try:
            return parse_strategy_labels(raw, schema="appendix7")
        except ParseFailure as exc:
            log.warning("annotation parse failure on %s (attempt %d): %s",
                        tag_base, attempt + 1, exc)
    return None


def save_annotations(path: Path, annotations) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for ann in annotations:
            fh.write(json.dumps(ann.to_dict(), sort_keys=True) + "\n")
            count += 1
    return count


def load_annotations(path: Path) -> list[AnnotatedTurn]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(AnnotatedTurn.from_dict(json.loads(line)))
    return out
