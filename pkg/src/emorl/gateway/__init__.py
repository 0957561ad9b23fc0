from .cache import CACHE_MODES, CompletionCache, cache_key
from .client import ChatRequest, EndpointProfile, Gateway, load_profiles

__all__ = [
    "CACHE_MODES",
    "CompletionCache",
    "cache_key",
    "ChatRequest",
    "EndpointProfile",
    "Gateway",
    "load_profiles",
]
