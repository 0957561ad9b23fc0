"""Multi-turn episode loop and deterministic batch rollout.

An episode alternates policy turns and simulator turns: the user opens, the
policy answers, the simulator judges the reply (emotion delta) and answers
in character, until a stop rule fires or the turn budget runs out. Episode
seeds are derived per (master seed, scenario, group index), so batches are
reproducible under any parallelism.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Protocol

from ..emotion import (
    EmotionState,
    RewardSpec,
    apply_delta,
    bucket_of,
    check_think_format,
    classify_outcome,
    final_reward,
)
from ..errors import ConfigError, EpisodeAbort, ParseFailure
from ..scenarios import Scenario
from ..seeding import derive_seed, derived_rng
from .transcripts import DialogueTranscript, Turn

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RolloutConfig:
    max_turns: int = 8
    group_size: int = 1
    reward: RewardSpec = field(default_factory=RewardSpec)
    thinking_mode: bool = True
    temperature: float = 1.0
    delta_clamp: float = 10.0
    parallelism: int = 1

    def __post_init__(self):
        if self.max_turns < 1:
            raise ConfigError(f"max_turns must be >= 1, got {self.max_turns}")
        if self.group_size < 1:
            raise ConfigError(f"group_size must be >= 1, got {self.group_size}")
        if self.parallelism < 1:
            raise ConfigError(f"parallelism must be >= 1, got {self.parallelism}")
        if self.reward.format_gate and not self.thinking_mode:
            raise ConfigError(
                "format_gate requires thinking_mode: plain replies would always be gated"
            )


@dataclass(frozen=True)
class PolicyResponse:
    text: str
    meta: dict | None = None


@dataclass(frozen=True)
class EpisodeView:
    """What a policy sees when asked to respond."""

    scenario: Scenario
    turns: tuple[Turn, ...]
    emotion_value: float
    turn_index: int  # 1-based index of the model turn being generated
    thinking_mode: bool
    episode_seed: int = 0

    @property
    def emotion_bucket(self) -> str:
        return bucket_of(self.emotion_value).value


class PolicyPort(Protocol):  # pragma: no cover - structural type
    snapshot_id: str

    def respond(self, view: EpisodeView, rng) -> PolicyResponse: ...


def run_episode(
    scenario: Scenario,
    policy,
    engine,
    config: RolloutConfig,
    episode_seed: int,
) -> DialogueTranscript:
    """Run one episode to termination.

    Stop rules, in order of precedence per turn: think-format violation
    (when thinking mode is on), the simulated user saying goodbye, emotion
    reaching the success threshold, emotion falling to the training failure
    threshold, and finally the turn budget.
    """
    state = EmotionState(scenario.initial_emotion)
    opener = engine.opening(scenario, episode_seed)
    turns: list[Turn] = [Turn("user", opener, emotion_after=state.value)]
    stop_rule = "max_turns"

    for t in range(1, config.max_turns + 1):
        rng = derived_rng(episode_seed, "policy", t)
        view = EpisodeView(
            scenario=scenario,
            turns=tuple(turns),
            emotion_value=state.value,
            turn_index=t,
            thinking_mode=config.thinking_mode,
            episode_seed=episode_seed,
        )
        response = policy.respond(view, rng)
        thought = None
        if config.thinking_mode:
            chk = check_think_format(response.text)
            if not chk.valid:
                turns.append(
                    Turn("model", response.text, delta=0.0,
                         emotion_after=state.value, meta=response.meta)
                )
                stop_rule = "format"
                break
            thought = chk.thought

        judgment = engine.judge(
            scenario, state, tuple(turns), response.text, episode_seed, t
        )
        try:
            new_state = apply_delta(state, judgment.change, config.delta_clamp)
        except ParseFailure as exc:
            raise EpisodeAbort(f"engine produced an unusable delta: {exc}") from exc
        meta = dict(response.meta or {})
        meta["judgment"] = {
            "content": judgment.content,
            "target_completion": judgment.target_completion,
            "activity": judgment.activity,
            "analyze": judgment.analyze,
            "change": judgment.change,
        }
        turns.append(
            Turn("model", response.text, thought=thought,
                 delta=new_state.deltas[-1], emotion_after=new_state.value, meta=meta)
        )
        state = new_state

        reply = engine.reply(scenario, state, judgment, tuple(turns), episode_seed, t)
        turns.append(
            Turn("user", reply.response, thought=reply.thinking,
                 emotion_after=state.value)
        )
        if reply.said_goodbye:
            stop_rule = "goodbye"
            break
        if state.value >= config.reward.success_threshold:
            stop_rule = "success_threshold"
            break
        if state.value <= config.reward.failure_threshold_train:
            stop_rule = "failure_threshold"
            break

    transcript = DialogueTranscript(
        scenario_id=scenario.scenario_id,
        topic_id=scenario.topic_id,
        difficulty=scenario.difficulty,
        episode_seed=episode_seed,
        policy_version=policy.snapshot_id,
        turns=tuple(turns),
        status="complete",
        stop_rule=stop_rule,
        e_T=state.value,
    )
    return replace(
        transcript,
        reward=final_reward(transcript, config.reward),
        termination=classify_outcome(transcript, config.reward),
    )


def _aborted_transcript(scenario, policy, episode_seed, reason) -> DialogueTranscript:
    return DialogueTranscript(
        scenario_id=scenario.scenario_id,
        topic_id=scenario.topic_id,
        difficulty=scenario.difficulty,
        episode_seed=episode_seed,
        policy_version=policy.snapshot_id,
        turns=(),
        status="aborted",
        abort_reason=reason,
    )


def run_batch(
    scenarios: list[Scenario],
    policy,
    engine,
    config: RolloutConfig,
    master_seed: int,
    parallelism: int | None = None,
) -> list[DialogueTranscript]:
    """Roll out ``len(scenarios) * group_size`` episodes.

    The result order is scenario order x group index, independent of the
    worker count; each episode gets a seed derived from (master seed,
    scenario id, group index). An aborted episode is recorded in place and
    does not fail the batch.
    """
    workers = config.parallelism if parallelism is None else parallelism
    if workers < 1:
        raise ConfigError(f"parallelism must be >= 1, got {workers}")
    # The batch position joins the seed derivation so transcripts keep
    # distinct seeds even when a scenario repeats in the batch.
    jobs = [
        (scenario, derive_seed(master_seed, position, scenario.scenario_id, group))
        for position, scenario in enumerate(scenarios)
        for group in range(config.group_size)
    ]

    def one(job):
        scenario, seed = job
        try:
            return run_episode(scenario, policy, engine, config, seed)
        except EpisodeAbort as exc:
            log.warning("episode %s:%d aborted: %s", scenario.scenario_id, seed, exc)
            return _aborted_transcript(scenario, policy, seed, str(exc))

    if workers == 1:
        return [one(job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, jobs))
