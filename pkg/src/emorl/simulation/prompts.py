"""Prompt template registry and rendering.

Templates are versioned text assets with named ``{slot}`` tokens. Rendering
substitutes every occurrence of each slot and refuses to proceed when a slot
value is missing or blank, so a half-filled prompt can never reach a model.
"""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources

from ..emotion import EmotionState, check_think_format
from ..errors import ConfigError
from ..scenarios import Scenario

TEMPLATE_VERSION = "1"

_SLOT_RE = re.compile(r"\{([a-z-]+)\}")

_TEMPLATE_NAMES = (
    "dialogue_purpose",
    "challenging_clause",
    "emotion_estimation",
    "emotion_state_definition",
    "reply_generation",
    "strategy_annotation",
    "capability_judge",
    "expression_judge",
    "scc_reason",
    "scc_profile",
    "scc_coordinate",
    "policy_think",
    "policy_no_think",
    "persona_generation",
    "background_generation",
)


@lru_cache(maxsize=None)
def template_text(name: str) -> str:
    if name not in _TEMPLATE_NAMES:
        raise ConfigError(f"unknown template {name!r}")
    ref = resources.files("emorl.simulation") / "templates" / f"{name}.txt"
    return ref.read_text(encoding="utf-8")


def template_slots(name: str) -> set[str]:
    return set(_SLOT_RE.findall(template_text(name)))


def render(name: str, **slots: str) -> str:
    """Substitute every slot occurrence; error on missing or blank values."""
    text = template_text(name)
    needed = template_slots(name)
    for slot in sorted(needed):
        key = slot.replace("-", "_")
        if key not in slots:
            raise ConfigError(f"template {name!r}: no value for slot {{{slot}}}")
        value = str(slots[key])
        if not value.strip():
            raise ConfigError(f"template {name!r}: blank value for slot {{{slot}}}")
        text = text.replace("{" + slot + "}", value)
    return text


def format_dialog(turns, model_label: str = "NPC", user_label: str = "Player") -> str:
    """Linear rendering of a turn list for {dialog-history} slots.

    Model turns are reduced to their user-visible reply: the simulated user
    never sees the think block.
    """
    lines = []
    for turn in turns:
        if turn.speaker == "model":
            chk = check_think_format(turn.text)
            text = chk.reply if chk.valid else turn.text
            lines.append(f"{model_label}: {text}")
        else:
            lines.append(f"{user_label}: {turn.text}")
    return "\n".join(lines)


def purpose_text(scenario: Scenario) -> str:
    base = template_text("dialogue_purpose").strip()
    if scenario.difficulty == "challenging":
        return base + "\n\n" + template_text("challenging_clause").strip()
    return base


def render_emotion_prompt(scenario: Scenario, state: EmotionState, turns) -> str:
    """The emotion-estimation prompt for the current dialogue position.

    The dialogue must end with a model turn: the analyzer judges the latest
    NPC reply.
    """
    if not turns or turns[-1].speaker != "model":
        raise ConfigError("emotion prompt requires a history ending with a model turn")
    return render(
        "emotion_estimation",
        purpose=purpose_text(scenario),
        persona=scenario.persona,
        background=scenario.background,
        emotion=f"{state.value:g}",
        dialog_history=format_dialog(turns),
    )


def render_reply_prompt(
    scenario: Scenario,
    state: EmotionState,
    planning: str,
    turns,
) -> str:
    bucket = state.bucket
    return render(
        "reply_generation",
        purpose=purpose_text(scenario),
        emotion_state_definition=template_text("emotion_state_definition").strip(),
        persona=scenario.persona,
        background=scenario.background,
        dialog_history=format_dialog(turns) if turns else "(the conversation has not started)",
        planning=planning if planning.strip() else "(no analysis yet: open the conversation)",
        emotion_state=f"Emotion-{bucket.value} (emotion value {state.value:g})",
    )
