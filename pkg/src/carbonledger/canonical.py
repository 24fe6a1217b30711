"""Canonical encoding and hashing primitives.

Every hash in the system is computed over the canonical encoding: key-sorted,
whitespace-free JSON in UTF-8. One 256-bit hash function is fixed per
deployment and named in the genesis configuration.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Any, Callable

DIGEST_SIZE = 32

# Deployment-selectable 256-bit hash functions.
HASH_FUNCTIONS: dict[str, Callable] = {
    "sha256": hashlib.sha256,
    "sha3-256": hashlib.sha3_256,
    "blake2s-256": hashlib.blake2s,
}


def canonical_bytes(value: Any) -> bytes:
    """Serialize ``value`` to canonical JSON bytes (sorted keys, no whitespace)."""
    return json.dumps(
        value, sort_keys=True, separators=(",", ":"), ensure_ascii=False, allow_nan=False
    ).encode("utf-8")


@dataclass(frozen=True)
class Digest:
    """A 256-bit digest; external form is 64 lowercase hex chars."""

    value: bytes

    def __post_init__(self):
        if not isinstance(self.value, bytes) or len(self.value) != DIGEST_SIZE:
            raise ValueError(f"digest must be {DIGEST_SIZE} bytes, got {self.value!r}")

    @property
    def hex(self) -> str:
        return self.value.hex()

    @classmethod
    def from_hex(cls, text: str) -> "Digest":
        if len(text) != 2 * DIGEST_SIZE or text != text.lower():
            raise ValueError(f"digest hex must be {2 * DIGEST_SIZE} lowercase chars")
        return cls(bytes.fromhex(text))

    def __str__(self) -> str:
        return self.hex


ZERO_DIGEST = Digest(b"\x00" * DIGEST_SIZE)


class Hasher:
    """The deployment's hash function, applied to raw bytes or canonical JSON."""

    def __init__(self, algo: str = "sha256"):
        if algo not in HASH_FUNCTIONS:
            raise ValueError(f"unknown hash function {algo!r}; known: {sorted(HASH_FUNCTIONS)}")
        self.algo = algo
        self._fn = HASH_FUNCTIONS[algo]

    def digest(self, data: bytes) -> Digest:
        return Digest(self._fn(data).digest())

    def digest_json(self, value: Any) -> Digest:
        return self.digest(canonical_bytes(value))
