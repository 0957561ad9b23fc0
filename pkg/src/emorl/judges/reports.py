"""CSV report writers with stable bytes.

Fixed headers, keys sorted, floats at 4 decimals, and a provenance comment
line (config hash + transcript digest) above the header, so re-running a
report on unchanged inputs reproduces it byte for byte.
"""

from __future__ import annotations

from pathlib import Path

from .capability import CAPABILITY_DIMENSIONS
from .metrics import BenchmarkStats


def _f(x: float) -> str:
    return f"{x:.4f}"


def _open(path: Path, provenance: str):
    fh = open(path, "w", encoding="utf-8", newline="")
    fh.write(f"# {provenance}\n")
    return fh


def provenance_line(config_hash: str, transcripts_digest: str) -> str:
    return f"config_hash={config_hash} transcripts_sha256={transcripts_digest}"


def write_frequency_csv(path: Path, freq: dict[str, float], provenance: str) -> None:
    with _open(path, provenance) as fh:
        fh.write("strategy,frequency\n")
        for code in sorted(freq):
            fh.write(f"{code},{_f(freq[code])}\n")


def write_contribution_csv(path: Path, contrib: dict[str, float], provenance: str) -> None:
    with _open(path, provenance) as fh:
        fh.write("strategy,contribution\n")
        for code in sorted(contrib):
            fh.write(f"{code},{_f(contrib[code])}\n")


def write_benchmark_csv(path: Path, stats: BenchmarkStats, provenance: str) -> None:
    with _open(path, provenance) as fh:
        fh.write("score,success_rate,failure_rate,n_transcripts,abort_count\n")
        score = "undefined" if stats.score is None else _f(stats.score)
        fh.write(
            f"{score},{_f(stats.success_rate)},{_f(stats.failure_rate)},"
            f"{stats.n_transcripts},{stats.abort_count}\n"
        )


def write_capabilities_csv(path: Path, rows, provenance: str) -> None:
    """rows: (transcript_id, CapabilityScores) pairs."""
    with _open(path, provenance) as fh:
        fh.write("transcript_id," + ",".join(CAPABILITY_DIMENSIONS) + "\n")
        for transcript_id, scores in sorted(rows, key=lambda r: r[0]):
            values = scores.as_dict()
            fh.write(
                transcript_id + ","
                + ",".join(str(values[d]) for d in CAPABILITY_DIMENSIONS) + "\n"
            )


def write_scc_csv(path: Path, points, provenance: str) -> None:
    with _open(path, provenance) as fh:
        fh.write("label,x,y\n")
        for p in sorted(points, key=lambda p: p.label):
            fh.write(f"{p.label},{_f(p.x)},{_f(p.y)}\n")
