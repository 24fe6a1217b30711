"""Local content-addressed blob store with pinning.

Certificates live here, off-chain; only their digests go on the chain. The
on-disk layout is one file per object named by hex digest plus a canonical
JSON manifest holding the pin set and the append-only upload history (the
history survives garbage collection so upload counters stay monotone).
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .canonical import Digest, Hasher, canonical_bytes
from .errors import EmptyPayload, NotFound, PayloadTooLarge

DEFAULT_MAX_OBJECT_BYTES = 16 * 1024 * 1024

MANIFEST_NAME = "manifest.json"


def _real_now_ms() -> int:
    return time.time_ns() // 1_000_000


@dataclass(frozen=True)
class StoredObject:
    digest: Digest
    size: int
    pinned: bool
    stored_at: int


class ContentStore:
    def __init__(
        self,
        root: str | Path,
        hasher: Hasher,
        max_object_bytes: int = DEFAULT_MAX_OBJECT_BYTES,
        now_ms: Callable[[], int] = _real_now_ms,
    ):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.hasher = hasher
        self.max_object_bytes = max_object_bytes
        self._now_ms = now_ms
        self._lock = threading.RLock()
        # digest hex -> {"size": int, "stored_at": int}; insertion order is put order
        self._objects: dict[str, dict] = {}
        self._pinned: set[str] = set()
        self._uploaded: list[str] = []  # append-only first-put history
        self._load_manifest()

    def _manifest_path(self) -> Path:
        return self.root / MANIFEST_NAME

    def _object_path(self, hex_digest: str) -> Path:
        return self.root / hex_digest

    def _load_manifest(self) -> None:
        path = self._manifest_path()
        if not path.exists():
            return
        data = json.loads(path.read_text("utf-8"))
        self._uploaded = list(data.get("uploaded", []))
        self._pinned = set(data.get("pinned", []))
        # drop manifest entries whose blob file is gone
        self._objects = {
            hex_digest: meta
            for hex_digest, meta in data.get("objects", {}).items()
            if self._object_path(hex_digest).exists()
        }
        self._pinned &= set(self._objects)

    def _save_manifest(self) -> None:
        payload = {
            "objects": self._objects,
            "pinned": sorted(self._pinned),
            "uploaded": self._uploaded,
        }
        tmp = self._manifest_path().with_suffix(".tmp")
        tmp.write_bytes(canonical_bytes(payload))
        os.replace(tmp, self._manifest_path())

    def put(self, data: bytes) -> Digest:
        """Store ``data``; idempotent for identical bytes. New objects start unpinned."""
        if not data:
            raise EmptyPayload("refusing to store an empty object")
        if len(data) > self.max_object_bytes:
            raise PayloadTooLarge(f"object of {len(data)} bytes exceeds limit {self.max_object_bytes}")
        digest = self.hasher.digest(data)
        with self._lock:
            if digest.hex not in self._objects:
                tmp = self._object_path(digest.hex).with_suffix(".tmp")
                tmp.write_bytes(data)
                os.replace(tmp, self._object_path(digest.hex))
                self._objects[digest.hex] = {"size": len(data), "stored_at": self._now_ms()}
                if digest.hex not in self._uploaded:
                    self._uploaded.append(digest.hex)
                self._save_manifest()
        return digest

    def get(self, digest: Digest) -> bytes:
        with self._lock:
            if digest.hex not in self._objects:
                raise NotFound(f"no object {digest.hex}")
            return self._object_path(digest.hex).read_bytes()

    def exists(self, digest: Digest) -> bool:
        with self._lock:
            return digest.hex in self._objects

    def stat(self, digest: Digest) -> StoredObject:
        with self._lock:
            meta = self._objects.get(digest.hex)
            if meta is None:
                raise NotFound(f"no object {digest.hex}")
            return StoredObject(
                digest=digest,
                size=meta["size"],
                pinned=digest.hex in self._pinned,
                stored_at=meta["stored_at"],
            )

    def pin(self, digest: Digest) -> None:
        with self._lock:
            if digest.hex not in self._objects:
                raise NotFound(f"cannot pin unknown object {digest.hex}")
            self._pinned.add(digest.hex)
            self._save_manifest()

    def unpin(self, digest: Digest) -> None:
        with self._lock:
            if digest.hex not in self._objects:
                raise NotFound(f"cannot unpin unknown object {digest.hex}")
            self._pinned.discard(digest.hex)
            self._save_manifest()

    def gc(self) -> list[Digest]:
        """Remove every unpinned object; returns their digests in put order."""
        with self._lock:
            evicted = [h for h in self._objects if h not in self._pinned]
            for hex_digest in evicted:
                self._object_path(hex_digest).unlink(missing_ok=True)
                del self._objects[hex_digest]
            if evicted:
                self._save_manifest()
            return [Digest.from_hex(h) for h in evicted]

    def object_count(self) -> int:
        with self._lock:
            return len(self._objects)

    def uploaded_count(self) -> int:
        """Distinct objects ever stored, including ones later evicted."""
        with self._lock:
            return len(self._uploaded)
