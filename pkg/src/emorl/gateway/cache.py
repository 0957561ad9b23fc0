"""Content-addressed record/replay cache for chat completions.

Entries are one JSON file per request key. The response text is digested on
write and verified on read, so a hand-edited entry is detected rather than
silently replayed.
"""

from __future__ import annotations

import hashlib
import json
import logging
from pathlib import Path

from ..errors import ConfigError

log = logging.getLogger(__name__)

CACHE_MODES = ("live", "record", "replay")


def _canonical(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def cache_key(profile: str, model: str, messages, temperature: float, tag: str) -> str:
    """Digest of the logical request; any field change misses."""
    body = _canonical(
        {
            "profile": profile,
            "model": model,
            "messages": messages,
            "temperature": temperature,
            "tag": tag,
        }
    )
    return hashlib.sha256(body.encode("utf-8")).hexdigest()


class CompletionCache:
    def __init__(self, directory: Path, strict: bool = False):
        self.directory = Path(directory)
        self.strict = strict
        self.directory.mkdir(parents=True, exist_ok=True)

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def get(self, key: str) -> str | None:
        path = self._path(key)
        if not path.exists():
            return None
        try:
            entry = json.loads(path.read_text(encoding="utf-8"))
            response = entry["response"]
            digest = entry["response_sha256"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            if self.strict:
                raise ConfigError(f"corrupt cache entry {path}: {exc}") from exc
            log.warning("skipping unreadable cache entry %s (%s)", path, exc)
            return None
        actual = hashlib.sha256(response.encode("utf-8")).hexdigest()
        if actual != digest:
            if self.strict:
                raise ConfigError(f"cache entry {path}: response digest mismatch")
            log.warning("skipping cache entry %s: response digest mismatch", path)
            return None
        return response

    def put(self, key: str, request_fields: dict, response: str) -> None:
        entry = dict(request_fields)
        entry["key"] = key
        entry["response"] = response
        entry["response_sha256"] = hashlib.sha256(response.encode("utf-8")).hexdigest()
        path = self._path(key)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(_canonical(entry), encoding="utf-8")
        tmp.replace(path)
