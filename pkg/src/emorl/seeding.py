"""Deterministic seed derivation.

Every source of randomness in the toolkit is keyed off a master seed plus a
string path (scenario id, turn index, purpose tag, ...) through SHA-256, so
results are independent of scheduling and process layout.
"""

from __future__ import annotations

import hashlib

import numpy as np

_U64 = 2**64


def derive_seed(*parts: object) -> int:
    """Collapse the given parts into a stable 64-bit seed."""
    key = "\x1f".join(str(p) for p in parts)
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def derived_rng(*parts: object) -> np.random.Generator:
    return np.random.default_rng(derive_seed(*parts))


def unit_uniform(*parts: object) -> float:
    """Stateless uniform draw in [0, 1) keyed by the parts.

    Used for per-turn accept/reveal decisions so identical inputs give
    identical outcomes regardless of evaluation order.
    """
    return derive_seed(*parts) / _U64
