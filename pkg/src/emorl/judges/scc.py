"""Social-cognition coordinate placement.

A three-call pipeline: explain each dialogue's outcome, distill the
explanations into a model profile, then ask for an (x, y) placement. The
coordinate prompt requests values in [-1, 1]; reported placements live on a
[-5, 5] grid, so a pm5 scale multiplies the judged pair by 5.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass

from ..errors import ParseFailure
from ..gateway import ChatRequest
from ..simulation.prompts import format_dialog, render

log = logging.getLogger(__name__)

_PAIR_RE = re.compile(
    r"\(\s*([-+]?\d+(?:\.\d+)?)\s*,\s*([-+]?\d+(?:\.\d+)?)\s*\)"
)

SCALES = ("pm1", "pm5")


@dataclass(frozen=True)
class SCCPoint:
    x: float
    y: float
    label: str = ""


def parse_scc_coordinates(raw: str) -> tuple[float, float]:
    """The last (x, y) pair in the judge's answer."""
    if not isinstance(raw, str):
        raise ParseFailure("coordinate output is not text", raw=repr(raw))
    pairs = _PAIR_RE.findall(raw)
    if not pairs:
        raise ParseFailure("no (x, y) coordinate pair found", raw=raw)
    x, y = pairs[-1]
    return float(x), float(y)


def _clip(v: float, bound: float, axis: str) -> float:
    if abs(v) > bound:
        log.warning("SCC %s=%s outside [-%s, %s]; clipping", axis, v, bound, bound)
        return max(-bound, min(bound, v))
    return v


def scale_scc(x: float, y: float, scale: str, label: str = "") -> SCCPoint:
    """Clamp a judged pm1 pair and optionally rescale it onto the pm5 grid."""
    if scale not in SCALES:
        raise ValueError(f"unknown SCC scale {scale!r}; expected one of {SCALES}")
    x = _clip(x, 1.0, "x")
    y = _clip(y, 1.0, "y")
    if scale == "pm5":
        x, y = x * 5.0, y * 5.0
    return SCCPoint(x=x, y=y, label=label)


def scc_place(
    profile_summary: str,
    strategy_distribution: dict[str, float],
    gateway,
    scale: str = "pm5",
    judge_profile: str = "judge",
    label: str = "",
) -> SCCPoint:
    """Place one model profile on the coordinate grid."""
    dist_lines = "\n".join(
        f"{code}: {share * 100:.1f}%" for code, share in sorted(strategy_distribution.items())
    )
    prompt = render(
        "scc_coordinate",
        model_profiles=profile_summary,
        strategy_distribution=dist_lines or "(no strategy statistics)",
    )
    raw = gateway.complete(
        ChatRequest(
            profile=judge_profile,
            messages=({"role": "user", "content": prompt},),
            tag=f"scc:place:{label}",
        )
    )
    x, y = parse_scc_coordinates(raw)
    return scale_scc(x, y, scale, label=label)


def build_model_profile(
    transcripts,
    gateway,
    judge_profile: str = "judge",
    label: str = "",
) -> str:
    """Stage 1 and 2 of the pipeline: per-dialogue reasons, then the profile."""
    analyses = []
    for tr in transcripts:
        if tr.status != "complete":
            continue
        prompt = render(
            "scc_reason",
            dialog_history=format_dialog(tr.turns, model_label="Assistant", user_label="User"),
        )
        analyses.append(
            gateway.complete(
                ChatRequest(
                    profile=judge_profile,
                    messages=({"role": "user", "content": prompt},),
                    tag=f"scc:reason:{label}:{tr.transcript_id}",
                )
            )
        )
    if not analyses:
        raise ParseFailure("no completed transcripts to profile")
    prompt = render("scc_profile", analysis="\n\n---\n\n".join(analyses))
    return gateway.complete(
        ChatRequest(
            profile=judge_profile,
            messages=({"role": "user", "content": prompt},),
            tag=f"scc:profile:{label}",
        )
    )
