"""Single egress point to chat-completion services.

Handles request shaping for the de-facto compatible wire format, retries
with exponential backoff, per-profile token-bucket rate limiting, and the
record/replay cache. Credentials are read from an environment variable at
call time and never stored, logged, or cached.
"""

from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import yaml

from ..errors import ConfigError, PermanentFailure, ReplayMiss, TransportFailure
from .cache import CACHE_MODES, CompletionCache, cache_key

log = logging.getLogger(__name__)

# transport(url, headers, payload, timeout) -> (status_code, parsed_json)
Transport = Callable[[str, dict, dict, float], tuple[int, dict]]


def _requests_transport(url: str, headers: dict, payload: dict, timeout: float):
    import requests

    try:
        resp = requests.post(url, headers=headers, json=payload, timeout=timeout)
    except requests.RequestException as exc:
        raise ConnectionError(str(exc)) from exc
    try:
        body = resp.json()
    except ValueError:
        body = {"raw": resp.text}
    return resp.status_code, body


@dataclass(frozen=True)
class EndpointProfile:
    name: str
    base_url: str
    model: str
    api_key_env: str = "EMORL_API_KEY"
    temperature: float = 0.0
    max_tokens: int = 1024
    rate_limit_per_sec: float = 5.0
    rate_burst: int = 5
    retry_budget: int = 3
    timeout_s: float = 60.0

    def __post_init__(self):
        if self.retry_budget < 1:
            raise ConfigError(f"profile {self.name!r}: retry_budget must be >= 1")
        if self.rate_limit_per_sec <= 0 or self.rate_burst < 1:
            raise ConfigError(f"profile {self.name!r}: invalid rate limit settings")


@dataclass(frozen=True)
class ChatRequest:
    profile: str
    messages: tuple
    temperature: float | None = None
    max_tokens: int | None = None
    model: str | None = None
    tag: str = ""

    def __post_init__(self):
        if not self.messages:
            raise ConfigError("chat request needs a non-empty message list")
        if self.temperature is not None and self.temperature < 0:
            raise ConfigError("temperature must be >= 0")


class TokenBucket:
    """Classic token bucket; clock and sleeper are injectable for tests."""

    def __init__(self, rate: float, burst: int, clock=time.monotonic, sleeper=time.sleep):
        self.rate = rate
        self.capacity = float(burst)
        self.tokens = float(burst)
        self.clock = clock
        self.sleeper = sleeper
        self._last = clock()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = self.clock()
                self.tokens = min(self.capacity, self.tokens + (now - self._last) * self.rate)
                self._last = now
                if self.tokens >= 1.0:
                    self.tokens -= 1.0
                    return
                wait = (1.0 - self.tokens) / self.rate
            self.sleeper(wait)


def load_profiles(path: Path) -> dict[str, EndpointProfile]:
    """Read the profiles file: a mapping of profile name -> fields."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: profiles file must hold a mapping")
    profiles = {}
    for name, fields in doc.items():
        if not isinstance(fields, dict):
            raise ConfigError(f"{path}: profile {name!r} must be a mapping")
        try:
            profiles[name] = EndpointProfile(name=name, **fields)
        except TypeError as exc:
            raise ConfigError(f"{path}: profile {name!r}: {exc}") from exc
    return profiles


class Gateway:
    """Chat-completion client with caching, retries, and rate limiting.

    ``mode`` is one of live (network only), record (network, responses
    written to the cache), replay (cache only; a miss is an error, never a
    silent network fallback).
    """

    def __init__(
        self,
        profiles: dict[str, EndpointProfile],
        mode: str = "live",
        cache_dir: Path | None = None,
        transport: Transport | None = None,
        clock=time.monotonic,
        sleeper=time.sleep,
        strict_cache: bool = False,
        getenv=None,
    ):
        if mode not in CACHE_MODES:
            raise ConfigError(f"unknown gateway mode {mode!r}; expected one of {CACHE_MODES}")
        if mode in ("record", "replay") and cache_dir is None:
            raise ConfigError(f"gateway mode {mode!r} requires a cache directory")
        self.profiles = profiles
        self.mode = mode
        self.cache = CompletionCache(cache_dir, strict=strict_cache) if cache_dir else None
        self.transport = transport or _requests_transport
        self.sleeper = sleeper
        self._getenv = getenv
        self._buckets = {
            name: TokenBucket(p.rate_limit_per_sec, p.rate_burst, clock, sleeper)
            for name, p in profiles.items()
        }

    def _profile(self, name: str) -> EndpointProfile:
        try:
            return self.profiles[name]
        except KeyError:
            raise ConfigError(f"no gateway profile named {name!r}") from None

    def _api_key(self, profile: EndpointProfile) -> str:
        import os

        getenv = self._getenv or os.environ.get
        key = getenv(profile.api_key_env)
        if not key:
            raise ConfigError(
                f"profile {profile.name!r}: credential env var "
                f"{profile.api_key_env!r} is not set"
            )
        return key

    def complete(self, req: ChatRequest) -> str:
        profile = self._profile(req.profile)
        model = req.model or profile.model
        temperature = profile.temperature if req.temperature is None else req.temperature
        messages = [dict(m) for m in req.messages]
        key = cache_key(profile.name, model, messages, temperature, req.tag)

        if self.mode == "replay":
            cached = self.cache.get(key)
            if cached is None:
                raise ReplayMiss(f"replay cache miss for tag {req.tag!r} (key {key[:12]}...)")
            return cached
        if self.mode == "record":
            cached = self.cache.get(key)
            if cached is not None:
                return cached

        text = self._call(profile, model, temperature, messages, req)
        if self.mode == "record":
            self.cache.put(
                key,
                {
                    "profile": profile.name,
                    "model": model,
                    "messages": messages,
                    "temperature": temperature,
                    "tag": req.tag,
                },
                text,
            )
        return text

    def _call(self, profile, model, temperature, messages, req: ChatRequest) -> str:
        url = profile.base_url.rstrip("/") + "/chat/completions"
        headers = {
            "Authorization": f"Bearer {self._api_key(profile)}",
            "Content-Type": "application/json",
        }
        payload = {
            "model": model,
            "messages": messages,
            "temperature": temperature,
            "max_tokens": req.max_tokens or profile.max_tokens,
        }
        last_error = "no attempt made"
        for attempt in range(profile.retry_budget):
            self._buckets[profile.name].acquire()
            try:
                status, body = self.transport(url, headers, payload, profile.timeout_s)
            except ConnectionError as exc:
                last_error = f"connection error: {exc}"
                log.warning("gateway %s attempt %d/%d failed: %s",
                            profile.name, attempt + 1, profile.retry_budget, last_error)
                self._backoff(attempt)
                continue
            if status == 200:
                try:
                    return body["choices"][0]["message"]["content"]
                except (KeyError, IndexError, TypeError) as exc:
                    raise PermanentFailure(
                        f"profile {profile.name!r}: malformed completion body ({exc})"
                    ) from exc
            if status == 429 or status >= 500:
                last_error = f"transient HTTP {status}"
                log.warning("gateway %s attempt %d/%d failed: %s",
                            profile.name, attempt + 1, profile.retry_budget, last_error)
                self._backoff(attempt)
                continue
            raise PermanentFailure(f"profile {profile.name!r}: HTTP {status}")
        raise TransportFailure(
            f"profile {profile.name!r}: retry budget ({profile.retry_budget}) "
            f"exhausted; last error: {last_error}"
        )

    def _backoff(self, attempt: int) -> None:
        self.sleeper(min(8.0, 0.25 * (2**attempt)))
