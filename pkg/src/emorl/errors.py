"""Exception hierarchy shared across the toolkit.

Parsers raise :class:`ParseFailure` and nothing else; transport-layer code
raises :class:`TransportFailure` subclasses so the CLI can map them to a
stable exit code.
"""

from __future__ import annotations


class EmorlError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(EmorlError):
    """Invalid or inconsistent configuration (CLI exit code 1)."""


class ParseFailure(EmorlError):
    """A judge/simulator output could not be parsed.

    Carries the raw text so callers can log it or retry the request.
    """

    def __init__(self, message: str, raw: str = ""):
        super().__init__(message)
        self.raw = raw


class EpisodeAbort(EmorlError):
    """An episode could not be completed (e.g. parse retries exhausted).

    Aborted episodes are recorded with a distinct status and excluded from
    reward statistics; they never silently contribute zeros.
    """


class StaleBatchError(EmorlError):
    """A trajectory batch was produced by a different policy snapshot."""


class TransportFailure(EmorlError):
    """Network-level failure after the retry budget was exhausted (exit 3)."""


class PermanentFailure(TransportFailure):
    """Non-retryable service response (auth error, bad request, ...)."""


class ReplayMiss(TransportFailure):
    """Replay-mode cache lookup missed; never falls back to the network."""
