"""LLM-backed user simulator: render, call, parse, with bounded retries.

Each turn makes two gateway calls: an emotion estimation whose Change value
updates the emotion state, then a reply generation conditioned on the
estimation's analysis (the planning) and the new emotion bucket. Parse
failures are retried with a fresh request tag up to the retry limit, after
which the episode is aborted rather than silently patched with a zero.
"""

from __future__ import annotations

import logging
from collections import namedtuple

from ..emotion import EmotionState
from ..errors import EpisodeAbort, ParseFailure, TransportFailure
from ..gateway import ChatRequest, Gateway
from ..scenarios import Scenario
from .parsing import (
    DEFAULT_FAREWELLS,
    EmotionJudgment,
    UserReply,
    parse_emotion_output,
    parse_reply_output,
)
from .prompts import render_emotion_prompt, render_reply_prompt

log = logging.getLogger(__name__)

_DisplayTurn = namedtuple("_DisplayTurn", ["speaker", "text"])


def planning_text(judgment: EmotionJudgment) -> str:
    """The estimation's four analysis sections, formatted for the reply call."""
    return (
        f"Content:\n{judgment.content}\n"
        f"TargetCompletion:\n{judgment.target_completion}\n"
        f"Activity:\n{judgment.activity}\n"
        f"Analyze:\n{judgment.analyze}"
    )


class LlmEngine:
    """Affect-engine port backed by a chat-completion gateway."""

    name = "llm"

    def __init__(
        self,
        gateway: Gateway,
        profile: str = "simulator",
        max_parse_retries: int = 3,
        farewell_markers: tuple[str, ...] = DEFAULT_FAREWELLS,
    ):
        self.gateway = gateway
        self.profile = profile
        self.max_parse_retries = max_parse_retries
        self.farewells = farewell_markers

    def _complete(self, prompt: str, tag: str) -> str:
        req = ChatRequest(
            profile=self.profile,
            messages=({"role": "user", "content": prompt},),
            tag=tag,
        )
        return self.gateway.complete(req)

    def _with_retries(self, render_fn, parse_fn, tag_base: str):
        last: Exception | None = None
        for attempt in range(self.max_parse_retries):
            tag = f"{tag_base}:{attempt}"
            try:
                return parse_fn(self._complete(render_fn(), tag))
            except ParseFailure as exc:
                log.warning("parse failure on %s (attempt %d/%d): %s",
                            tag, attempt + 1, self.max_parse_retries, exc)
                last = exc
            except TransportFailure as exc:
                log.warning("transport failure on %s (attempt %d/%d): %s",
                            tag, attempt + 1, self.max_parse_retries, exc)
                last = exc
        raise EpisodeAbort(f"retries exhausted for {tag_base}: {last}") from last

    def opening(self, scenario: Scenario, episode_seed: int) -> str:
        reply = self._with_retries(
            lambda: render_reply_prompt(
                scenario, EmotionState(scenario.initial_emotion), "", ()
            ),
            lambda raw: parse_reply_output(raw, self.farewells),
            f"open:{scenario.scenario_id}:{episode_seed}",
        )
        return reply.response

    def judge(self, scenario, state, history, model_turn, episode_seed, turn_index) -> EmotionJudgment:
        display = tuple(history) + (_DisplayTurn("model", model_turn),)
        return self._with_retries(
            lambda: render_emotion_prompt(scenario, state, display),
            parse_emotion_output,
            f"emotion:{scenario.scenario_id}:{episode_seed}:{turn_index}",
        )

    def reply(self, scenario, state, judgment, history, episode_seed, turn_index) -> UserReply:
        return self._with_retries(
            lambda: render_reply_prompt(scenario, state, planning_text(judgment), history),
            lambda raw: parse_reply_output(raw, self.farewells),
            f"reply:{scenario.scenario_id}:{episode_seed}:{turn_index}",
        )
