from .parsing import (
    DEFAULT_FAREWELLS,
    EmotionJudgment,
    UserReply,
    parse_emotion_output,
    parse_reply_output,
)
from .profiles import ScriptedAffectProfile, profile_for
from .scripted import ScriptedEngine, scripted_judge, scripted_reply

__all__ = [
    "DEFAULT_FAREWELLS",
    "EmotionJudgment",
    "UserReply",
    "parse_emotion_output",
    "parse_reply_output",
    "ScriptedAffectProfile",
    "profile_for",
    "ScriptedEngine",
    "scripted_judge",
    "scripted_reply",
]
