"""Non-trainable policy ports: gateway-backed LLM and replay-from-file."""

from __future__ import annotations

import hashlib
from pathlib import Path

from ..errors import EpisodeAbort
from ..gateway import ChatRequest, Gateway
from ..rollout.engine import EpisodeView, PolicyResponse
from ..rollout.transcripts import load_transcripts
from ..simulation.prompts import template_text


class LlmPolicy:
    """Chat-completion policy with the think or plain system template."""

    def __init__(self, gateway: Gateway, profile: str = "policy", temperature: float = 1.0):
        self.gateway = gateway
        self.profile = profile
        self.temperature = temperature
        self.snapshot_id = f"llm:{profile}"

    def respond(self, view: EpisodeView, rng) -> PolicyResponse:
        system = template_text("policy_think" if view.thinking_mode else "policy_no_think")
        messages = [{"role": "system", "content": system}]
        for turn in view.turns:
            role = "assistant" if turn.speaker == "model" else "user"
            messages.append({"role": role, "content": turn.text})
        text = self.gateway.complete(
            ChatRequest(
                profile=self.profile,
                messages=tuple(messages),
                temperature=self.temperature,
                tag=f"policy:{view.scenario.scenario_id}:{view.episode_seed}:{view.turn_index}",
            )
        )
        return PolicyResponse(text=text, meta=None)


class ReplayPolicy:
    """Re-emits model turns recorded in a transcript file.

    Works when the batch is re-run with the same master seed and scenario
    set, because episode seeds are derived deterministically from those.
    """

    def __init__(self, path: Path):
        path = Path(path)
        self._by_episode: dict[tuple[str, int], list[str]] = {}
        for tr in load_transcripts(path):
            texts = [t.text for t in tr.turns if t.speaker == "model"]
            self._by_episode[(tr.scenario_id, tr.episode_seed)] = texts
        digest = hashlib.sha256(path.read_bytes()).hexdigest()[:16]
        self.snapshot_id = f"replay-{digest}"

    def respond(self, view: EpisodeView, rng) -> PolicyResponse:
        key = (view.scenario.scenario_id, view.episode_seed)
        texts = self._by_episode.get(key)
        if texts is None or view.turn_index > len(texts):
            raise EpisodeAbort(
                f"no recorded turn {view.turn_index} for episode "
                f"{key[0]}:{key[1]} in the replay file"
            )
        return PolicyResponse(text=texts[view.turn_index - 1], meta=None)
