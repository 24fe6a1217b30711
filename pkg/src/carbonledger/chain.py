"""Append-only chain of transaction blocks.

Each block commits an ordered batch of transactions under a Merkle root and
links to its parent by header digest. Blocks are immutable once appended.
The export format ("block log") is one canonical-JSON block per line; every
line carries its own header digest so any corrupted byte is attributable to
the exact block it landed in.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .canonical import Digest, Hasher, ZERO_DIGEST, canonical_bytes
from .errors import EmptyBatch, IndexOutOfRange, InvalidTransactionId
from .merkle import (
    ProofStep,
    build_inclusion_proof,
    compute_merkle_root,
    verify_inclusion_proof,
)
from .profiles import PlatformProfile

# Synthetic actor for the genesis transaction.
NULL_ACTOR = "0" * 64


class TxKind(str, Enum):
    GENESIS = "Genesis"
    REGISTER_ACCOUNT = "RegisterAccount"
    DEPOSIT = "Deposit"
    MINT = "Mint"
    LIST = "List"
    CANCEL = "Cancel"
    BUY = "Buy"


@dataclass(frozen=True)
class Transaction:
    """A canonical record of one state change; ``id`` hashes the other fields."""

    id: Digest
    kind: TxKind
    actor: str
    payload: dict
    fee: int
    nonce: int

    def signing_fields(self) -> dict:
        return {
            "kind": self.kind.value,
            "actor": self.actor,
            "payload": self.payload,
            "fee": self.fee,
            "nonce": self.nonce,
        }

    def verify_id(self, hasher: Hasher) -> bool:
        return hasher.digest_json(self.signing_fields()) == self.id

    def to_json(self) -> dict:
        return {"id": self.id.hex, **self.signing_fields()}


def build_transaction(
    kind: TxKind, actor: str, payload: dict, fee: int, nonce: int, hasher: Hasher
) -> Transaction:
    fields = {"kind": kind.value, "actor": actor, "payload": payload, "fee": fee, "nonce": nonce}
    return Transaction(
        id=hasher.digest_json(fields), kind=kind, actor=actor, payload=payload, fee=fee, nonce=nonce
    )


_TX_KEYS = {"id", "kind", "actor", "payload", "fee", "nonce"}


def transaction_from_json(obj: dict) -> Transaction:
    if not isinstance(obj, dict) or set(obj) != _TX_KEYS:
        raise ValueError(f"malformed transaction record: keys {sorted(obj) if isinstance(obj, dict) else obj}")
    if not isinstance(obj["payload"], dict):
        raise ValueError("transaction payload must be an object")
    if not isinstance(obj["fee"], int) or isinstance(obj["fee"], bool) or obj["fee"] < 0:
        raise ValueError("transaction fee must be a non-negative integer")
    if not isinstance(obj["nonce"], int) or isinstance(obj["nonce"], bool) or obj["nonce"] < 0:
        raise ValueError("transaction nonce must be a non-negative integer")
    return Transaction(
        id=Digest.from_hex(obj["id"]),
        kind=TxKind(obj["kind"]),
        actor=str(obj["actor"]),
        payload=obj["payload"],
        fee=obj["fee"],
        nonce=obj["nonce"],
    )


@dataclass(frozen=True)
class BlockHeader:
    height: int
    prev_hash: Digest
    merkle_root: Digest
    timestamp: int  # milliseconds since epoch
    tx_count: int

    def to_json(self) -> dict:
        return {
            "height": self.height,
            "prev_hash": self.prev_hash.hex,
            "merkle_root": self.merkle_root.hex,
            "timestamp": self.timestamp,
            "tx_count": self.tx_count,
        }


_HEADER_KEYS = {"height", "prev_hash", "merkle_root", "timestamp", "tx_count"}


def header_from_json(obj: dict) -> BlockHeader:
    if not isinstance(obj, dict) or set(obj) != _HEADER_KEYS:
        raise ValueError("malformed block header record")
    for key in ("height", "timestamp", "tx_count"):
        if not isinstance(obj[key], int) or isinstance(obj[key], bool):
            raise ValueError(f"header field {key} must be an integer")
    return BlockHeader(
        height=obj["height"],
        prev_hash=Digest.from_hex(obj["prev_hash"]),
        merkle_root=Digest.from_hex(obj["merkle_root"]),
        timestamp=obj["timestamp"],
        tx_count=obj["tx_count"],
    )


@dataclass(frozen=True)
class Block:
    header: BlockHeader
    transactions: tuple[Transaction, ...]

    def tx_ids(self) -> list[Digest]:
        return [tx.id for tx in self.transactions]


def block_digest(header: BlockHeader, hasher: Hasher) -> Digest:
    return hasher.digest_json(header.to_json())


def genesis(config_digest: Digest, timestamp: int, hasher: Hasher) -> Block:
    """Height-0 block anchoring the deployment configuration digest."""
    tx = build_transaction(
        TxKind.GENESIS,
        NULL_ACTOR,
        {"config_digest": config_digest.hex},
        fee=0,
        nonce=0,
        hasher=hasher,
    )
    header = BlockHeader(
        height=0,
        prev_hash=ZERO_DIGEST,
        merkle_root=tx.id,
        timestamp=timestamp,
        tx_count=1,
    )
    return Block(header=header, transactions=(tx,))


def append_block(
    parent: BlockHeader,
    pending: Sequence[Transaction],
    profile: PlatformProfile,
    block_interval_s: float,
    timestamp: int,
    hasher: Hasher,
) -> tuple[Block, list[Transaction]]:
    """Seal up to capacity pending transactions into the next block.

    Returns the block and the deferred remainder in order. Capacity is
    floor(throughput_tps * block_interval_s), minimum 1.
    """
    if not pending:
        raise EmptyBatch("cannot produce an empty block")
    for tx in pending:
        if not tx.verify_id(hasher):
            raise InvalidTransactionId(f"transaction id {tx.id.hex} does not match its contents")
    if timestamp <= parent.timestamp:
        raise ValueError("block timestamps must strictly increase")
    capacity = profile.capacity(block_interval_s)
    included = list(pending[:capacity])
    deferred = list(pending[capacity:])
    header = BlockHeader(
        height=parent.height + 1,
        prev_hash=block_digest(parent, hasher),
        merkle_root=compute_merkle_root([tx.id for tx in included], hasher),
        timestamp=timestamp,
        tx_count=len(included),
    )
    return Block(header=header, transactions=tuple(included)), deferred


def merkle_proof(block: Block, tx_index: int, hasher: Hasher) -> list[ProofStep]:
    if not 0 <= tx_index < block.header.tx_count:
        raise IndexOutOfRange(f"tx index {tx_index} out of range for block of {block.header.tx_count}")
    return build_inclusion_proof(block.tx_ids(), tx_index, hasher)


def verify_merkle_proof(
    leaf: Digest, proof: Sequence[ProofStep], root: Digest, hasher: Hasher
) -> bool:
    return verify_inclusion_proof(leaf, proof, root, hasher)


@dataclass(frozen=True)
class VerificationReport:
    ok: bool
    height: int | None = None
    rule: str | None = None
    detail: str = ""

    def to_json(self) -> dict:
        return {"ok": self.ok, "height": self.height, "rule": self.rule, "detail": self.detail}


def _check_block(index: int, block: Block, prev: Block | None, hasher: Hasher) -> VerificationReport | None:
    """First violated rule for one block, or None. ``index`` is the expected height."""
    fail = lambda rule, detail: VerificationReport(False, index, rule, detail)
    if not block.transactions:
        return fail("EmptyBlock", "block carries no transactions")
    for pos, tx in enumerate(block.transactions):
        if not tx.verify_id(hasher):
            return fail("TxIdMismatch", f"transaction {pos} id does not recompute")
    if block.header.tx_count != len(block.transactions):
        return fail("TxCountMismatch", f"header says {block.header.tx_count}, block has {len(block.transactions)}")
    if compute_merkle_root(block.tx_ids(), hasher) != block.header.merkle_root:
        return fail("MerkleMismatch", "merkle root does not recompute from transaction ids")
    if prev is None:
        if block.header.height != 0:
            return fail("GenesisMismatch", f"first block has height {block.header.height}")
        if block.header.prev_hash != ZERO_DIGEST:
            return fail("GenesisMismatch", "genesis prev_hash is not the zero digest")
        if len(block.transactions) != 1 or block.transactions[0].kind is not TxKind.GENESIS:
            return fail("GenesisMismatch", "genesis must carry exactly the config transaction")
        return None
    if any(tx.kind is TxKind.GENESIS for tx in block.transactions):
        return fail("GenesisMismatch", "config transaction outside the genesis block")
    if block.header.prev_hash != block_digest(prev.header, hasher):
        return fail("LinkageMismatch", "prev_hash does not match the parent block digest")
    if block.header.height != prev.header.height + 1:
        return fail("HeightMismatch", f"height {block.header.height} after {prev.header.height}")
    if block.header.timestamp <= prev.header.timestamp:
        return fail("TimestampOrder", "block timestamp does not strictly increase")
    return None


def verify_chain(blocks: Sequence[Block], hasher: Hasher) -> VerificationReport:
    """Validate structure, linkage, and hashes; report the first failing block."""
    if not blocks:
        return VerificationReport(False, None, "EmptyChain", "chain has no blocks")
    prev = None
    for index, block in enumerate(blocks):
        report = _check_block(index, block, prev, hasher)
        if report is not None:
            return report
        prev = block
    return VerificationReport(True)


# --- block log (export) format ---

_BLOCK_KEYS = {"digest", "header", "transactions"}


def encode_block_line(block: Block, hasher: Hasher) -> bytes:
    return canonical_bytes(
        {
            "digest": block_digest(block.header, hasher).hex,
            "header": block.header.to_json(),
            "transactions": [tx.to_json() for tx in block.transactions],
        }
    )


def decode_block_line(line: bytes) -> tuple[Block, Digest]:
    """Parse one log line; returns the block and its stated digest (unchecked)."""
    obj = json.loads(line.decode("utf-8"))
    if not isinstance(obj, dict) or set(obj) != _BLOCK_KEYS:
        raise ValueError("malformed block record")
    if not isinstance(obj["transactions"], list):
        raise ValueError("block transactions must be a list")
    header = header_from_json(obj["header"])
    txs = tuple(transaction_from_json(t) for t in obj["transactions"])
    return Block(header=header, transactions=txs), Digest.from_hex(obj["digest"])


def verify_block_lines(
    lines: Sequence[bytes], hasher: Hasher, expected_head: tuple[int, Digest] | None = None
) -> tuple[list[Block], VerificationReport]:
    """Decode and fully verify an exported block log.

    Checks, per line: parseability, the stated digest, then all chain rules.
    ``expected_head`` is the separately persisted (height, digest) anchor; the
    chain must reach at least that height and match that digest there.
    """
    blocks: list[Block] = []
    prev: Block | None = None
    for index, line in enumerate(lines):
        try:
            block, stated = decode_block_line(line)
        except (ValueError, KeyError, TypeError) as exc:
            return blocks, VerificationReport(False, index, "UnparsableRecord", str(exc))
        if block_digest(block.header, hasher) != stated:
            return blocks, VerificationReport(
                False, index, "RecordDigestMismatch", "stated block digest does not recompute"
            )
        report = _check_block(index, block, prev, hasher)
        if report is not None:
            return blocks, report
        blocks.append(block)
        prev = block
    if not blocks:
        return blocks, VerificationReport(False, None, "EmptyChain", "block log has no records")
    if expected_head is not None:
        head_height, head_digest = expected_head
        if len(blocks) - 1 < head_height:
            return blocks, VerificationReport(
                False, len(blocks) - 1, "HeadMismatch",
                f"log ends at height {len(blocks) - 1} but head anchor says {head_height}",
            )
        anchored = blocks[head_height]
        if block_digest(anchored.header, hasher) != head_digest:
            return blocks, VerificationReport(
                False, head_height, "HeadMismatch", "head anchor digest does not match the chain"
            )
    return blocks, VerificationReport(True)
