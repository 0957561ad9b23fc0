"""Support-strategy taxonomies and the marker lexicon.

Two annotation schemas coexist: the 5-group main taxonomy (canonical for
contribution reporting) and a finer 7-group taxonomy spoken by the LLM
annotator. A configurable mapping projects 7-group codes onto the main
taxonomy; codes without a sensible main-group counterpart are dropped.
"""

from __future__ import annotations

from .errors import ConfigError

# Canonical 5-group taxonomy: code -> human label.
MAIN5: dict[str, str] = {
    "A-1": "Praising the client's qualities",
    "A-2": "Praising the client's positive thoughts",
    "A-3": "Praising the client's actions",
    "B-1": "Providing empathy via restating the client's problem",
    "B-2": "Deeper empathy to understand the client's hidden intention",
    "B-3": "Self-disclosure that provides agreement with the client's view",
    "B-4": "Self-disclosure that introduces the supporter's own story",
    "C-1": "Expressing willingness to hear the client's thoughts",
    "C-2": "Helping the client to vent negative feelings",
    "D-1": "Advice specific to the client's situation",
    "E-1": "Analysis of the client's issue",
}

MAIN5_GROUPS: dict[str, str] = {
    "A": "Praise",
    "B": "Deep Empathy",
    "C": "Emotional Venting",
    "D": "Advice Provision",
    "E": "Problem Analysis",
}

# Finer 7-group annotator taxonomy: code -> label.
APPENDIX7: dict[str, str] = {
    "A-1": "Information follow-up",
    "A-2": "Mental state follow-up",
    "A-3": "Ask the player for a solution",
    "A-4": "Ask the player for his or her opinion",
    "A-5": "Ask questions",
    "B-1": "Shallow empathy",
    "B-2": "Problem restatement and empathy",
    "B-3": "Deep intention empathy",
    "C-1": "Echo-type self-disclosure",
    "C-2": "Story-based self-disclosure",
    "D-1": "Emotional comfort",
    "D-2": "Express willingness to listen",
    "D-3": "Help the person who is talking to vent his emotions",
    "E-1": "Appreciation of qualities",
    "E-2": "Praise positive ideas",
    "E-3": "Affirmative behavior",
    "E-4": "Companionship and support",
    "F-1": "Problem analysis",
    "F-2": "Emotional relief suggestions",
    "F-3": "Psychological counseling suggestions",
    "F-4": "Problem solving suggestions - general",
    "F-5": "Problem-solving suggestions for the speaker's problem",
    "G-1": "Problem analysis and emotional counseling related information",
    "G-2": "Related information on problem-solving suggestions",
}

SCHEMAS: dict[str, dict[str, str]] = {"main5": MAIN5, "appendix7": APPENDIX7}

# Default projection from the 7-group schema onto the main one. Questioning
# (A-*) and the relief/counseling suggestion codes (F-2, F-3) have no main
# counterpart and are dropped. Override via the `mapping` argument of
# map_to_main5 when a different reading is wanted.
APPENDIX7_TO_MAIN5: dict[str, str] = {
    "B-1": "B-1",
    "B-2": "B-1",
    "B-3": "B-2",
    "C-1": "B-3",
    "C-2": "B-4",
    "D-1": "C-2",
    "D-2": "C-1",
    "D-3": "C-2",
    "E-1": "A-1",
    "E-2": "A-2",
    "E-3": "A-3",
    "E-4": "A-1",
    "F-1": "E-1",
    "F-4": "D-1",
    "F-5": "D-1",
    "G-1": "E-1",
    "G-2": "E-1",
}

# Marker phrases used by the scripted simulator and the keyword annotator.
# The toy policy's reply templates embed exactly these phrases, so detection
# stays an honest text scan rather than a side channel.
MARKERS: dict[str, tuple[str, ...]] = {
    "A-1": ("you have such a good heart", "your strength really shows"),
    "A-2": ("that's a really healthy way to look at it",),
    "A-3": ("what you did took real courage",),
    "B-1": ("so if i hear you right,", "it sounds like you've been carrying"),
    "B-2": ("underneath all this, i sense you really need",),
    "B-3": ("honestly, i'd feel exactly the same in your shoes",),
    "B-4": ("something similar happened to me once",),
    "C-1": ("i'm here to listen, tell me everything",),
    "C-2": ("let it all out, you're allowed to be angry",),
    "D-1": ("here's what you could try:",),
    "E-1": ("let's break down what's actually going on:",),
}


def validate_schema(schema: str) -> dict[str, str]:
    if schema not in SCHEMAS:
        raise ConfigError(
            f"unknown strategy schema {schema!r}; expected one of {sorted(SCHEMAS)}"
        )
    return SCHEMAS[schema]


def group_of(code: str) -> str:
    return code.split("-", 1)[0]


def map_to_main5(codes: set[str], mapping: dict[str, str] | None = None) -> set[str]:
    """Project 7-group codes onto the main taxonomy, dropping unmapped ones."""
    table = APPENDIX7_TO_MAIN5 if mapping is None else mapping
    return {table[c] for c in codes if c in table}


def detect_strategies(reply_text: str, lexicon: dict[str, tuple[str, ...]] | None = None) -> set[str]:
    """Keyword detection of main-taxonomy strategies in a model reply."""
    lex = MARKERS if lexicon is None else lexicon
    lowered = reply_text.lower()
    return {
        code
        for code, phrases in lex.items()
        if any(phrase in lowered for phrase in phrases)
    }
