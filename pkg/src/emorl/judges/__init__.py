from .annotate import AnnotatedTurn, annotate_transcripts, parse_strategy_labels
from .capability import CAPABILITY_DIMENSIONS, CapabilityScores, parse_capability_output
from .expression import parse_expression_output
from .metrics import (
    BenchmarkStats,
    acceptance_rate,
    benchmark_stats,
    strategy_contribution,
    strategy_frequency,
)
from .scc import SCCPoint, parse_scc_coordinates, scale_scc

__all__ = [
    "AnnotatedTurn",
    "annotate_transcripts",
    "parse_strategy_labels",
    "CAPABILITY_DIMENSIONS",
    "CapabilityScores",
    "parse_capability_output",
    "parse_expression_output",
    "BenchmarkStats",
    "acceptance_rate",
    "benchmark_stats",
    "strategy_contribution",
    "strategy_frequency",
    "SCCPoint",
    "parse_scc_coordinates",
    "scale_scc",
]
