"""Deterministic scripted user simulator.

A stand-in for the LLM-backed simulator: it detects support strategies in
the model's reply by marker phrases, turns them into an emotion delta via
the profile table, and answers from bucket-conditioned templates. Judging
and replying are pure functions of (profile, scenario, inputs, seed), so a
whole episode replays bit-for-bit from its seed.
"""

from __future__ import annotations

from ..emotion import EmotionBucket, EmotionState, check_think_format
from ..scenarios import Scenario
from ..seeding import unit_uniform
from ..strategies import MAIN5, detect_strategies
from .parsing import DEFAULT_FAREWELLS, EmotionJudgment, UserReply, contains_farewell
from .profiles import ScriptedAffectProfile


def visible_reply(model_turn: str) -> str:
    """The user-facing part of a model turn (thoughts are never seen)."""
    chk = check_think_format(model_turn)
    return chk.reply if chk.valid else model_turn


def scripted_judge(
    profile: ScriptedAffectProfile,
    model_turn: str,
    episode_seed: int,
    turn_index: int,
) -> EmotionJudgment:
    """Deterministic emotion estimation for one model turn.

    change = sum over detected strategies of (delta_mean if accepted else
    miss penalty) + goal bonus when the goal strategy is present - verbosity
    penalty, clamped to the profile's delta bound. Acceptance draws are a
    seeded hash of (episode seed, turn index, strategy), so the same inputs
    always produce the same judgment.
    """
    reply = visible_reply(model_turn)
    detected = sorted(detect_strategies(reply))
    accepted: list[str] = []
    rejected: list[str] = []
    change = 0.0
    if detected:
        for code in detected:
            delta_mean, acceptance = profile.strategy_response.get(
                code, (0.0, 0.0)
            )
            draw = unit_uniform(episode_seed, turn_index, code, "accept")
            if draw < acceptance:
                accepted.append(code)
                change += delta_mean
            else:
                rejected.append(code)
                change += profile.miss_penalty
    else:
        change += profile.miss_penalty
    goal_hit = profile.goal_strategy is not None and profile.goal_strategy in detected
    if goal_hit:
        change += profile.goal_bonus
    tokens = len(reply.split())
    overflow = max(0, tokens - profile.length_cap)
    change -= profile.verbosity_penalty * overflow
    change = max(-profile.delta_clamp, min(profile.delta_clamp, change))

    def names(codes: list[str]) -> str:
        return ", ".join(f"({c}) {MAIN5[c]}" for c in codes) if codes else "nothing specific"

    content = f"The supporter offered: {names(detected)}."
    if goal_hit:
        target = "The reply addresses what the character actually needs."
    elif detected:
        target = "The reply helps a little but misses the character's real need."
    else:
        target = "The reply does not engage with the character's need at all."
    activity = (
        f"The character weighs the reply; {names(accepted)} landed well, "
        f"{names(rejected)} fell flat."
    )
    analyze = (
        "The character feels "
        + ("genuinely understood." if change > 0 else "let down by this reply.")
    )
    return EmotionJudgment(
        content=content,
        target_completion=target,
        activity=activity,
        analyze=analyze,
        change=change,
    )


_REPLY_TEMPLATES: dict[EmotionBucket, tuple[str, ...]] = {
    EmotionBucket.S: (
        "You have no idea how much lighter I feel now. Thank you, truly. Goodbye!",
        "This is exactly what I needed to hear. Thank you so much. Bye-bye!",
    ),
    EmotionBucket.A: (
        "That actually helps a lot. I didn't expect to feel this understood.",
        "Okay, yeah. Talking to you is really helping me sort this out.",
    ),
    EmotionBucket.B: (
        "Mm, maybe. I'm still turning it over in my head.",
        "I hear you. It's just a lot to sit with, you know?",
    ),
    EmotionBucket.C: (
        "I don't know. That's not really landing for me right now.",
        "Honestly, I'm not sure you're getting what this is like.",
    ),
    EmotionBucket.F: (
        "I can't do this conversation right now. Goodbye.",
        "Forget it, this isn't helping at all. Bye-bye.",
    ),
}


def scripted_reply(
    profile: ScriptedAffectProfile,
    scenario: Scenario,
    state: EmotionState,
    episode_seed: int,
    turn_index: int,
    farewell_markers: tuple[str, ...] = DEFAULT_FAREWELLS,
) -> UserReply:
    """Bucket-conditioned templated reply.

    S and F buckets end the conversation with a farewell. In the middle
    buckets, a seeded draw against the profile's reveal level decides whether
    the reply names the hidden intention outright.
    """
    bucket = state.bucket
    variants = _REPLY_TEMPLATES[bucket]
    pick = int(unit_uniform(episode_seed, turn_index, "variant") * len(variants))
    response = variants[pick]
    revealed = False
    if bucket not in (EmotionBucket.S, EmotionBucket.F):
        draw = unit_uniform(episode_seed, turn_index, "reveal")
        if draw < profile.reveal_level:
            revealed = True
            response = f"{response} What I really need is this: {scenario.hidden_intention}"
    thinking = (
        f"My mood sits around {state.value:g} ({bucket.value}). "
        f"My real need: {scenario.hidden_intention} "
        + ("I let it show this time." if revealed else "I keep it to myself for now.")
    )
    return UserReply(
        thinking=thinking,
        response=response,
        said_goodbye=contains_farewell(response, farewell_markers),
    )


class ScriptedEngine:
    """Affect-engine port backed by the scripted judge and reply."""

    name = "scripted"

    def __init__(self, profile_override: ScriptedAffectProfile | None = None,
                 farewell_markers: tuple[str, ...] = DEFAULT_FAREWELLS):
        self._override = profile_override
        self._farewells = farewell_markers

    def _profile(self, scenario: Scenario) -> ScriptedAffectProfile:
        if self._override is not None:
            return self._override
        from .profiles import profile_for

        return profile_for(scenario)

    def opening(self, scenario: Scenario, episode_seed: int) -> str:
        return scenario.opener()

    def judge(
        self,
        scenario: Scenario,
        state: EmotionState,
        history,
        model_turn: str,
        episode_seed: int,
        turn_index: int,
    ) -> EmotionJudgment:
        return scripted_judge(self._profile(scenario), model_turn, episode_seed, turn_index)

    def reply(
        self,
        scenario: Scenario,
        state: EmotionState,
        judgment: EmotionJudgment,
        history,
        episode_seed: int,
        turn_index: int,
    ) -> UserReply:
        return scripted_reply(
            self._profile(scenario), scenario, state, episode_seed, turn_index,
            farewell_markers=self._farewells,
        )
