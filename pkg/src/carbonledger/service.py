"""The deployable market service.

Owns everything durable: the block log (one canonical-JSON block per line,
each line carrying its own digest), the HEAD anchor, the off-chain identity
table (kept in a separate file from the chain, never exported with it), the
idempotency journal, and the content store directory.

Commands from any number of request handlers funnel through one writer
thread; responses resolve only after the command's transactions are sealed
into a block and the block is on disk.
"""

from __future__ import annotations

import json
import os
import queue
import threading
from concurrent.futures import Future
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from . import errors as _errors
from .canonical import Digest, Hasher, canonical_bytes
from .chain import (
    Block,
    VerificationReport,
    block_digest,
    encode_block_line,
    verify_block_lines,
)
from .engine import Clock, MarketEngine, SystemClock
from .errors import ConfigInvalid, CorruptLog, MarketError, Unauthorized
from .profiles import PlatformProfile, get_profile
from .registry import Role, TokenMetadata
from .store import ContentStore, DEFAULT_MAX_OBJECT_BYTES

ENV_PREFIX = "CARBONLEDGER_"

BLOCK_LOG_NAME = "blocks.log"
HEAD_NAME = "HEAD"
IDENTITIES_NAME = "identities.json"
IDEMPOTENCY_NAME = "idempotency.log"
ISSUER_CREDENTIAL_NAME = "issuer_credential"
OBJECTS_DIR = "objects"


@dataclass
class ServiceConfig:
    data_dir: str = "./market-data"
    platform_profile: str = "solana"
    block_interval_s: float = 1.0
    royalty_bps: int = 500
    listen_address: str = "127.0.0.1:8547"
    issuer_name: str = "Deployment Issuer"
    issuer_contact: str = ""
    hash_function: str = "sha256"
    max_object_bytes: int = DEFAULT_MAX_OBJECT_BYTES
    durable_fsync: bool = True  # fsync per committed block; disable only for bulk test runs

    def validate(self) -> "ServiceConfig":
        try:
            get_profile(self.platform_profile)
        except ConfigInvalid:
            raise
        if not 0 <= self.royalty_bps <= 10_000:
            raise ConfigInvalid(f"royalty_bps {self.royalty_bps} outside 0..10000")
        if self.block_interval_s <= 0:
            raise ConfigInvalid("block_interval_s must be positive")
        if self.max_object_bytes < 1:
            raise ConfigInvalid("max_object_bytes must be positive")
        try:
            Hasher(self.hash_function)
        except ValueError as exc:
            raise ConfigInvalid(str(exc))
        return self

    def to_json(self) -> dict:
        return {
            "data_dir": self.data_dir,
            "platform_profile": self.platform_profile,
            "block_interval_s": self.block_interval_s,
            "royalty_bps": self.royalty_bps,
            "listen_address": self.listen_address,
            "issuer_name": self.issuer_name,
            "issuer_contact": self.issuer_contact,
            "hash_function": self.hash_function,
            "max_object_bytes": self.max_object_bytes,
        }


def load_config(path: str | Path | None = None, env: dict | None = None, **overrides) -> ServiceConfig:
    """Build config from file values, then environment, then explicit overrides."""
    env = os.environ if env is None else env
    values: dict[str, Any] = {}
    if path is not None and Path(path).exists():
        values.update(json.loads(Path(path).read_text("utf-8")))
    casts = {
        "block_interval_s": float,
        "royalty_bps": int,
        "max_object_bytes": int,
        "durable_fsync": lambda s: s.strip().lower() in ("1", "true", "yes"),
    }
    for name in ServiceConfig.__dataclass_fields__:
        env_value = env.get(ENV_PREFIX + name.upper())
        if env_value is not None:
            values[name] = casts.get(name, str)(env_value)
    for name, value in overrides.items():
        if value is not None:
            values[name] = value
    unknown = set(values) - set(ServiceConfig.__dataclass_fields__)
    if unknown:
        raise ConfigInvalid(f"unknown config keys: {sorted(unknown)}")
    return ServiceConfig(**values).validate()


@dataclass(frozen=True)
class CommandEnvelope:
    credential: str
    command: str
    params: dict
    idempotency_key: str | None = None


@dataclass
class _PendingResolution:
    future: Future
    outcome: tuple[str, Any]  # ("ok", body) | ("error", MarketError)
    actor_id: str | None
    idempotency_key: str | None


def _atomic_write(path: Path, data: bytes, fsync: bool = True) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(data)
        fh.flush()
        if fsync:
            os.fsync(fh.fileno())
    os.replace(tmp, path)


def _error_from_body(body: dict) -> MarketError:
    cls = getattr(_errors, body.get("code", ""), MarketError)
    if not (isinstance(cls, type) and issubclass(cls, MarketError)):
        cls = MarketError
    return cls(body.get("message", ""), body.get("detail", ""))


class MarketService:
    """A running deployment over one data directory."""

    def __init__(self, config: ServiceConfig, clock: Clock | None = None):
        self.config = config.validate()
        self.clock = clock or SystemClock()
        self.data_dir = Path(config.data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.hasher = Hasher(config.hash_function)
        self.profile: PlatformProfile = get_profile(config.platform_profile)
        self.store = ContentStore(
            self.data_dir / OBJECTS_DIR,
            self.hasher,
            max_object_bytes=config.max_object_bytes,
            now_ms=self.clock.now_ms,
        )
        self.engine = MarketEngine(
            hasher=self.hasher,
            profile=self.profile,
            block_interval_s=config.block_interval_s,
            royalty_bps=config.royalty_bps,
            store=self.store,
            clock=self.clock,
            on_block=self._on_block,
        )
        self._log_file = None
        self._awaiting: dict[str, _PendingResolution] = {}
        self._idempotent: dict[tuple[str, str], dict] = {}
        self._inflight: dict[tuple[str, str], Future] = {}
        self._queue: queue.Queue = queue.Queue()
        self._writer: threading.Thread | None = None
        self._stopping = threading.Event()
        self.issuer_id: str | None = None

        log_path = self._block_log_path()
        if log_path.exists() and log_path.stat().st_size == 0 and not self._head_path().exists():
            # crash landed between creating the log and writing genesis
            log_path.unlink()
        if log_path.exists():
            self._open_existing()
        else:
            self._bootstrap()

    # --- paths ---

    def _block_log_path(self) -> Path:
        return self.data_dir / BLOCK_LOG_NAME

    def _head_path(self) -> Path:
        return self.data_dir / HEAD_NAME

    def _identities_path(self) -> Path:
        return self.data_dir / IDENTITIES_NAME

    def _idempotency_path(self) -> Path:
        return self.data_dir / IDEMPOTENCY_NAME

    # --- startup ---

    def _bootstrap(self) -> None:
        self._log_file = open(self._block_log_path(), "ab")
        issuer_id, credential = self.engine.bootstrap(
            self.config.issuer_name, self.config.issuer_contact
        )
        self.issuer_id = issuer_id
        self._persist_identities()
        cred_path = self.data_dir / ISSUER_CREDENTIAL_NAME
        cred_path.write_text(credential + "\n")
        os.chmod(cred_path, 0o600)

    def _read_head(self) -> tuple[int, Digest] | None:
        path = self._head_path()
        if not path.exists():
            return None
        try:
            obj = json.loads(path.read_text("utf-8"))
            return int(obj["height"]), Digest.from_hex(obj["digest"])
        except (ValueError, KeyError, TypeError) as exc:
            raise CorruptLog("head anchor is unreadable", detail=str(exc))

    def _open_existing(self) -> None:
        raw = self._block_log_path().read_bytes()
        lines = [line for line in raw.split(b"\n") if line]
        head = self._read_head()
        blocks, report = verify_block_lines(lines, self.hasher, expected_head=head)
        if not report.ok:
            # A torn final line past the HEAD anchor is an uncommitted block
            # from a crash mid-append; drop it. Anything else is corruption.
            head_height = head[0] if head else -1
            if report.height == len(lines) - 1 and report.height > head_height:
                lines = lines[:-1]
                blocks, report = verify_block_lines(lines, self.hasher, expected_head=head)
                if report.ok:
                    with open(self._block_log_path(), "wb") as fh:
                        for line in lines:
                            fh.write(line + b"\n")
                        fh.flush()
                        os.fsync(fh.fileno())
            if not report.ok:
                raise CorruptLog(
                    f"block log fails verification at height {report.height}",
                    detail=f"{report.rule}: {report.detail}",
                    height=report.height,
                )
        stated = blocks[0].transactions[0].payload.get("config_digest")
        if stated != self.engine.config_digest().hex:
            raise ConfigInvalid(
                "active configuration does not match the genesis config digest",
                detail="hash function, platform profile, and royalty rate are fixed at genesis",
            )
        self.engine.load(blocks)
        self._load_identities()
        self._load_idempotency()
        self._write_head(blocks[-1])
        self._log_file = open(self._block_log_path(), "ab")

    def _load_identities(self) -> None:
        path = self._identities_path()
        if not path.exists():
            return
        table = json.loads(path.read_text("utf-8"))
        for account_id, record in table.items():
            if account_id not in self.engine.registry.accounts:
                continue  # registered but never committed before a crash
            self.engine.attach_identity(
                account_id, record["legal_name"], record["contact"], record["credential"]
            )
            if record.get("role") == Role.ISSUER_ADMIN.value:
                self.issuer_id = account_id
        if self.issuer_id is None:
            self.issuer_id = self.engine.registry.issuer_id

    def _persist_identities(self) -> None:
        registry = self.engine.registry
        table = {
            account_id: {
                "legal_name": identity.legal_name,
                "contact": identity.contact,
                "credential": registry.accounts[account_id].credential,
                "role": registry.accounts[account_id].role.value,
            }
            for account_id, identity in registry.identities.items()
            if account_id in registry.accounts
        }
        _atomic_write(self._identities_path(), canonical_bytes(table))

    def _load_idempotency(self) -> None:
        path = self._idempotency_path()
        if not path.exists():
            return
        for line in path.read_bytes().split(b"\n"):
            if not line:
                continue
            try:
                entry = json.loads(line.decode("utf-8"))
                self._idempotent[(entry["actor"], entry["key"])] = entry
            except (ValueError, KeyError):
                continue  # torn tail line from a crash

    # --- durability ---

    def _write_head(self, block: Block) -> None:
        payload = {
            "height": block.header.height,
            "digest": block_digest(block.header, self.hasher).hex,
        }
        _atomic_write(self._head_path(), canonical_bytes(payload) + b"\n",
                      fsync=self.config.durable_fsync)

    def _on_block(self, block: Block) -> None:
        self._log_file.write(encode_block_line(block, self.hasher) + b"\n")
        self._log_file.flush()
        if self.config.durable_fsync:
            os.fsync(self._log_file.fileno())
        self._write_head(block)
        for tx in block.transactions:
            resolution = self._awaiting.pop(tx.id.hex, None)
            if resolution is not None:
                self._finish(resolution)

    def _finish(self, resolution: _PendingResolution) -> None:
        status, value = resolution.outcome
        if resolution.actor_id and resolution.idempotency_key:
            key = (resolution.actor_id, resolution.idempotency_key)
            body = value if status == "ok" else value.to_body()
            entry = {
                "actor": resolution.actor_id,
                "key": resolution.idempotency_key,
                "status": status,
                "body": body,
            }
            self._idempotent[key] = entry
            with open(self._idempotency_path(), "ab") as fh:
                fh.write(canonical_bytes(entry) + b"\n")
            self._inflight.pop(key, None)
        if status == "ok":
            resolution.future.set_result(value)
        else:
            resolution.future.set_exception(value)

    # --- command pipeline ---

    def start(self) -> None:
        if self._writer is not None:
            return
        self._stopping.clear()
        self._writer = threading.Thread(target=self._writer_loop, name="market-writer", daemon=True)
        self._writer.start()

    def stop(self) -> None:
        if self._writer is None:
            self.close()
            return
        self._stopping.set()
        self._writer.join()
        self._writer = None
        self.close()

    def close(self) -> None:
        """Flush pending work and release the log file (graceful shutdown)."""
        with self.engine.lock:
            self.engine.flush()
            self._persist_identities()
        if self._log_file is not None:
            self._log_file.close()
            self._log_file = None

    def _writer_loop(self) -> None:
        while not self._stopping.is_set():
            due = self.engine.next_due_ms()
            timeout = 0.05 if due is None else min(0.05, max(due, 1) / 1000)
            try:
                job = self._queue.get(timeout=timeout)
            except queue.Empty:
                job = None
            if job is not None:
                self._execute(*job)
            self.engine.maybe_cut()
        # drain: anything still queued is refused
        while True:
            try:
                job = self._queue.get_nowait()
            except queue.Empty:
                break
            job[1].set_exception(MarketError("service is shutting down"))

    def submit(self, envelope: CommandEnvelope, timeout: float = 60.0):
        """Run one command through the writer; blocks until it is durable."""
        if self._writer is None:
            # No writer thread (embedded/test mode): execute inline and flush.
            future: Future = Future()
            self._execute(envelope, future)
            self.engine.flush()
            return future.result(timeout=0)
        future = Future()
        self._queue.put((envelope, future))
        return future.result(timeout=timeout)

    def _execute(self, envelope: CommandEnvelope, future: Future) -> None:
        actor_id = None
        pending_before = len(self.engine.pending)
        try:
            actor_id = self.engine.resolve_credential(envelope.credential)
            if actor_id is None:
                raise Unauthorized("unknown or missing credential")
            if envelope.idempotency_key:
                key = (actor_id, envelope.idempotency_key)
                stored = self._idempotent.get(key)
                if stored is not None:
                    if stored["status"] == "ok":
                        future.set_result(stored["body"])
                    else:
                        future.set_exception(_error_from_body(stored["body"]))
                    return
                inflight = self._inflight.get(key)
                if inflight is not None:
                    inflight.add_done_callback(lambda f: _copy_future(f, future))
                    return
                self._inflight[key] = future
            result = self._dispatch(envelope.command, actor_id, envelope.params)
            outcome = ("ok", result)
        except MarketError as exc:
            outcome = ("error", exc)
        except (KeyError, TypeError, ValueError) as exc:
            outcome = ("error", MarketError(f"invalid command parameters: {exc}"))
        if actor_id is None:
            future.set_exception(outcome[1])
            return
        resolution = _PendingResolution(
            future=future,
            outcome=outcome,
            actor_id=actor_id,
            idempotency_key=envelope.idempotency_key,
        )
        if len(self.engine.pending) > pending_before:
            # resolve when the last emitted transaction is sealed and durable
            self._awaiting[self.engine.pending[-1].id.hex] = resolution
        else:
            self._finish(resolution)

    def _dispatch(self, command: str, actor_id: str, params: dict):
        engine = self.engine
        if command == "register_account":
            result = engine.register_account(
                actor_id, params["legal_name"], params["contact"], Role(params["role"])
            )
            # the credential must be durable before the response can be
            self._persist_identities()
            return result
        if command == "deposit":
            return engine.deposit(actor_id, params["account_id"], int(params["amount"]))
        if command == "upload_certificate":
            return engine.upload_certificate(actor_id, params["data"])
        if command == "mint":
            metadata = TokenMetadata(
                name=params["name"],
                symbol=params["symbol"],
                project_id=params.get("project_id", ""),
                quantity_tco2e=str(params["quantity_tco2e"]),
                vintage_year=int(params["vintage_year"]),
                metadata_uri=params.get("metadata_uri", ""),
            )
            return engine.mint(
                actor_id,
                metadata,
                Digest.from_hex(params["certificate_digest"]),
                int(params["primary_price"]),
            )
        if command == "list_for_sale":
            return engine.list_for_sale(actor_id, int(params["token_id"]), int(params["price"]))
        if command == "cancel":
            return engine.cancel(actor_id, int(params["listing_id"]))
        if command == "buy":
            return engine.buy(actor_id, int(params["listing_id"]))
        raise MarketError(f"unknown command {command!r}")

    # --- reads (thread-safe, served from engine state) ---

    def resolve_credential(self, credential: str) -> str | None:
        return self.engine.resolve_credential(credential)

    def verify_stored_chain(self) -> VerificationReport:
        """Verify the on-disk block log against the HEAD anchor."""
        raw = self._block_log_path().read_bytes()
        lines = [line for line in raw.split(b"\n") if line]
        try:
            head = self._read_head()
        except CorruptLog as exc:
            return VerificationReport(False, None, "HeadMismatch", exc.detail or exc.message)
        _, report = verify_block_lines(lines, self.hasher, expected_head=head)
        return report

    def export_lines(self) -> list[bytes]:
        raw = self._block_log_path().read_bytes()
        return [line for line in raw.split(b"\n") if line]


def _copy_future(src: Future, dst: Future) -> None:
    exc = src.exception()
    if exc is not None:
        dst.set_exception(exc)
    else:
        dst.set_result(src.result())
