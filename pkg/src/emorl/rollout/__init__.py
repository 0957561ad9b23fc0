from .engine import EpisodeView, PolicyResponse, RolloutConfig, run_batch, run_episode
from .transcripts import (
    SCHEMA_VERSION,
    DialogueTranscript,
    Turn,
    load_transcripts,
    save_transcripts,
    transcripts_digest,
)

__all__ = [
    "EpisodeView",
    "PolicyResponse",
    "RolloutConfig",
    "run_batch",
    "run_episode",
    "SCHEMA_VERSION",
    "DialogueTranscript",
    "Turn",
    "load_transcripts",
    "save_transcripts",
    "transcripts_digest",
]
