"""Aggregate statistics over transcripts and strategy annotations.

Pure functions; every aggregation refuses to mix annotation schemas within
one report.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from ..errors import ConfigError
from ..strategies import validate_schema


def _single_schema(annotations) -> str:
    schemas = {a.schema for a in annotations}
    if len(schemas) > 1:
        raise ConfigError(
            f"annotations mix schemas {sorted(schemas)}; one report uses one schema"
        )
    return next(iter(schemas))


def strategy_frequency(annotations) -> dict[str, float]:
    """Fraction of annotated turns in which each strategy appears.

    Every schema strategy is present in the map, unused ones at 0. Turns can
    carry several strategies, so the values need not sum to 1. No annotated
    turns at all yields an empty map.
    """
    annotations = list(annotations)
    if not annotations:
        return {}
    schema = validate_schema(_single_schema(annotations))
    total = len(annotations)
    counts = {code: 0 for code in schema}
    for ann in annotations:
        for code in ann.strategies:
            if code in counts:
                counts[code] += 1
    return {code: counts[code] / total for code in schema}


def strategy_contribution(annotations) -> dict[str, float]:
    """Mean emotion change over the turns where each strategy appears.

    A turn with several strategies credits its full delta to each of them.
    Strategies with zero instances are absent from the map, not zero.
    """
    annotations = list(annotations)
    if not annotations:
        return {}
    _single_schema(annotations)
    sums: dict[str, float] = {}
    counts: dict[str, int] = {}
    for ann in annotations:
        for code in ann.strategies:
            sums[code] = sums.get(code, 0.0) + ann.emo_change
            counts[code] = counts.get(code, 0) + 1
    return {code: sums[code] / counts[code] for code in sums}


@dataclass(frozen=True)
class BenchmarkStats:
    score: float | None
    success_rate: float
    failure_rate: float
    n_transcripts: int
    abort_count: int


def benchmark_stats(
    transcripts,
    success_threshold: float = 100.0,
    failure_threshold: float = 10.0,
) -> BenchmarkStats:
    """Sentient-style benchmark numbers over a transcript set.

    The mean score caps each terminal emotion at 100 (overshoot still counts
    toward the success rate, which requires strictly above the threshold).
    Aborted transcripts are counted but excluded from every statistic.
    """
    usable = []
    aborted = 0
    for tr in transcripts:
        if tr.status == "complete":
            usable.append(tr)
        else:
            aborted += 1
    if not usable:
        return BenchmarkStats(None, 0.0, 0.0, 0, aborted)
    n = len(usable)
    score = sum(min(tr.e_T, 100.0) for tr in usable) / n
    success = sum(1 for tr in usable if tr.e_T > success_threshold) / n
    failure = sum(1 for tr in usable if tr.e_T < failure_threshold) / n
    return BenchmarkStats(score, success, failure, n, aborted)


def acceptance_rate(deltas: Iterable[float]) -> float:
    """Fraction of judged turns with a strictly positive emotion change."""
    deltas = list(deltas)
    if not deltas:
        return 0.0
    return sum(1 for d in deltas if d > 0) / len(deltas)
