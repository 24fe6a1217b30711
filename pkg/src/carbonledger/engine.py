"""Deterministic single-writer market engine.

All state changes flow through here: commands are validated against current
state, turned into transactions, applied immediately, and sealed into blocks.
Block production is demand-driven but paced: at most one block per
block_interval, each holding at most capacity = floor(tps * interval)
transactions, so the sustained inclusion rate never exceeds the platform
profile's throughput.

Replaying the block log through ``load`` rebuilds byte-identical state.
"""

from __future__ import annotations

import secrets
import threading
import time
from typing import Callable, Optional, Protocol, Sequence

from .analytics import AnalyticsSnapshot, ownership_report, take_snapshot
from .canonical import Digest, Hasher
from .chain import (
    Block,
    Transaction,
    TxKind,
    VerificationReport,
    append_block,
    block_digest,
    build_transaction,
    encode_block_line,
    genesis,
    merkle_proof,
    verify_chain,
)
from .errors import (
    DuplicateCertificate,
    InvalidAmount,
    NotFound,
    NotIssuer,
    UnknownCertificate,
)
from .market import ListingTier, Marketplace
from .profiles import PlatformProfile
from .registry import IdentityRecord, Registry, Role, TokenMetadata
from .store import ContentStore


class Clock(Protocol):
    def now_ms(self) -> int: ...


class SystemClock:
    def now_ms(self) -> int:
        return time.time_ns() // 1_000_000


class ManualClock:
    """Test clock; time moves only when told to."""

    def __init__(self, start_ms: int = 1_700_000_000_000):
        self._now = start_ms

    def now_ms(self) -> int:
        return self._now

    def advance(self, ms: int) -> None:
        self._now += ms


class MarketEngine:
    def __init__(
        self,
        hasher: Hasher,
        profile: PlatformProfile,
        block_interval_s: float,
        royalty_bps: int,
        store: ContentStore,
        clock: Clock | None = None,
        on_block: Optional[Callable[[Block], None]] = None,
    ):
        self.hasher = hasher
        self.profile = profile
        self.block_interval_s = block_interval_s
        self.royalty_bps = royalty_bps
        self.store = store
        self.clock = clock or SystemClock()
        self.on_block = on_block
        self.registry = Registry()
        self.marketplace = Marketplace(self.registry, royalty_bps)
        self.blocks: list[Block] = []
        self.pending: list[Transaction] = []
        self.lock = threading.RLock()
        self._last_cut_ms: int | None = None
        self._snapshot: AnalyticsSnapshot | None = None
        self._credentials: dict[str, str] = {}  # bearer secret -> account id

    # --- configuration anchoring ---

    def config_digest(self) -> Digest:
        return self.hasher.digest_json(
            {
                "hash_function": self.hasher.algo,
                "platform_profile": self.profile.to_json(),
                "royalty_bps": self.royalty_bps,
            }
        )

    # --- lifecycle ---

    def bootstrap(self, issuer_name: str, issuer_contact: str) -> tuple[str, str]:
        """First start: write genesis and self-register the issuer account."""
        with self.lock:
            if self.blocks:
                raise RuntimeError("engine already has a chain")
            block = genesis(self.config_digest(), self.clock.now_ms(), self.hasher)
            self._commit(block)
            issuer_id = self._new_account_id()
            tx = build_transaction(
                TxKind.REGISTER_ACCOUNT,
                issuer_id,
                {"account_id": issuer_id, "role": Role.ISSUER_ADMIN.value},
                fee=0,
                nonce=0,
                hasher=self.hasher,
            )
            self._append_tx(tx)
            credential = self._issue_credential(issuer_id, issuer_name, issuer_contact)
            self.flush()
            return issuer_id, credential

    def load(self, blocks: Sequence[Block]) -> None:
        """Rebuild state by replaying an already-verified chain."""
        with self.lock:
            if self.blocks:
                raise RuntimeError("engine already has a chain")
            for block in blocks:
                for tx in block.transactions:
                    self._apply(tx, block.header.height)
                self.blocks.append(block)
            self._snapshot = self._take_snapshot()

    def attach_identity(self, account_id: str, legal_name: str, contact: str, credential: str) -> None:
        """Rebind the off-chain identity and credential after a replay."""
        with self.lock:
            account = self.registry.require_account(account_id)
            account.credential = credential
            self._credentials[credential] = account_id
            self.registry.identities[account_id] = IdentityRecord(
                account_id=account_id, legal_name=legal_name, contact=contact
            )

    # --- block production ---

    def _interval_ms(self) -> int:
        return max(1, int(self.block_interval_s * 1000))

    def _capacity(self) -> int:
        return self.profile.capacity(self.block_interval_s)

    def _commit(self, block: Block) -> None:
        self.blocks.append(block)
        self._snapshot = self._take_snapshot()
        if self.on_block is not None:
            self.on_block(block)

    def _cut(self, now_ms: int) -> Block:
        tip = self.blocks[-1].header
        timestamp = max(now_ms, tip.timestamp + 1)
        block, deferred = append_block(
            tip, self.pending, self.profile, self.block_interval_s, timestamp, self.hasher
        )
        self.pending = deferred
        self._last_cut_ms = now_ms
        self._commit(block)
        return block

    def maybe_cut(self) -> Block | None:
        """Seal one block if demand exists and the interval pacing allows it."""
        with self.lock:
            if not self.pending:
                return None
            now = self.clock.now_ms()
            if self._last_cut_ms is not None and now - self._last_cut_ms < self._interval_ms():
                return None
            return self._cut(now)

    def flush(self) -> list[Block]:
        """Seal all pending transactions now (shutdown and tests); ignores pacing."""
        out = []
        with self.lock:
            while self.pending:
                out.append(self._cut(self.clock.now_ms()))
        return out

    def next_due_ms(self) -> int | None:
        """Milliseconds until the next block is due, or None when idle."""
        with self.lock:
            if not self.pending:
                return None
            if self._last_cut_ms is None:
                return 0
            return max(0, self._last_cut_ms + self._interval_ms() - self.clock.now_ms())

    # --- transaction plumbing ---

    def _new_account_id(self) -> str:
        seq = len(self.registry.accounts)
        seed = block_digest(self.blocks[0].header, self.hasher).value
        return self.hasher.digest(seed + b"/account/" + seq.to_bytes(8, "big")).hex

    def _issue_credential(self, account_id: str, legal_name: str, contact: str) -> str:
        credential = secrets.token_hex(32)
        account = self.registry.accounts[account_id]
        account.credential = credential
        self._credentials[credential] = account_id
        self.registry.identities[account_id] = IdentityRecord(
            account_id=account_id, legal_name=legal_name, contact=contact
        )
        return credential

    def _build_tx(self, kind: TxKind, actor_id: str, payload: dict, fee: int = 0) -> Transaction:
        account = self.registry.accounts.get(actor_id)
        nonce = account.nonce if account is not None else 0
        return build_transaction(kind, actor_id, payload, fee, nonce, self.hasher)

    def _landing_height(self) -> int:
        return len(self.blocks) + len(self.pending) // self._capacity()

    def _append_tx(self, tx: Transaction):
        result = self._apply(tx, self._landing_height())
        self.pending.append(tx)
        return result

    def _apply(self, tx: Transaction, height: int):
        """State transition for one chain transaction; total for any recorded tx."""
        result = None
        if tx.kind is TxKind.GENESIS:
            return None
        if tx.kind is TxKind.REGISTER_ACCOUNT:
            result = self.registry.apply_register(tx.payload)
        elif tx.kind is TxKind.DEPOSIT:
            result = self.marketplace.apply_deposit(tx.payload)
        elif tx.kind is TxKind.MINT:
            token = self.registry.apply_mint(tx.actor, tx.payload, height)
            if token is not None:
                self.store.pin(token.certificate_hash)
            result = token
        elif tx.kind is TxKind.LIST:
            result = self.marketplace.apply_list(tx.actor, tx.payload, height)
        elif tx.kind is TxKind.CANCEL:
            result = self.marketplace.apply_cancel(tx.payload)
        elif tx.kind is TxKind.BUY:
            result = self.marketplace.apply_buy(tx.actor, tx.payload, tx.fee, height)
        actor = self.registry.accounts.get(tx.actor)
        if actor is not None:
            actor.nonce = tx.nonce + 1
        return result

    # --- commands ---

    def register_account(self, actor_id: str, legal_name: str, contact: str, role: Role) -> dict:
        with self.lock:
            if not legal_name:
                raise InvalidAmount("legal_name must be nonempty")
            self.registry.check_register(actor_id, role)
            account_id = self._new_account_id()
            tx = self._build_tx(
                TxKind.REGISTER_ACCOUNT,
                actor_id,
                {"account_id": account_id, "role": role.value},
            )
            self._append_tx(tx)
            credential = self._issue_credential(account_id, legal_name, contact)
            return {"account_id": account_id, "credential": credential, "role": role.value}

    def deposit(self, actor_id: str, account_id: str, amount: int) -> dict:
        with self.lock:
            self.marketplace.check_deposit(actor_id, account_id, amount)
            tx = self._build_tx(
                TxKind.DEPOSIT, actor_id, {"account_id": account_id, "amount": amount}
            )
            balance = self._append_tx(tx)
            return {"account_id": account_id, "balance": balance}

    def upload_certificate(self, actor_id: str, data: bytes) -> dict:
        # Certificates are mint inputs, so uploads are issuer-only; this keeps
        # the uploaded counter meaning "distinct certificates the issuer stored".
        with self.lock:
            actor = self.registry.require_account(actor_id)
            if actor.role is not Role.ISSUER_ADMIN:
                raise NotIssuer("only the issuer uploads certificates")
            digest = self.store.put(data)
            return {"digest": digest.hex, "size": len(data)}

    def mint(
        self, actor_id: str, metadata: TokenMetadata, certificate_digest: Digest, primary_price: int
    ) -> dict:
        with self.lock:
            self.registry.check_mint(actor_id)
            metadata.validate()
            if primary_price < 0:
                raise InvalidAmount("primary price must be non-negative")
            if not self.store.exists(certificate_digest):
                raise UnknownCertificate(f"no stored certificate {certificate_digest.hex}")
            duplicate = certificate_digest.hex in self.registry.used_certificates
            mint_tx = self._build_tx(
                TxKind.MINT,
                actor_id,
                {
                    "certificate_hash": certificate_digest.hex,
                    "name": metadata.name,
                    "symbol": metadata.symbol,
                    "project_id": metadata.project_id,
                    "quantity_tco2e": metadata.quantity_tco2e,
                    "vintage_year": metadata.vintage_year,
                    "metadata_uri": metadata.metadata_uri,
                },
            )
            token = self._append_tx(mint_tx)
            if duplicate:
                # The rejected attempt stays on the chain so the duplicate
                # counter is auditable and replayable.
                raise DuplicateCertificate(
                    f"certificate {certificate_digest.hex} is already minted"
                )
            list_tx = self._build_tx(
                TxKind.LIST, actor_id, {"token_id": token.token_id, "price": primary_price}
            )
            listing = self._append_tx(list_tx)
            return {"token_id": token.token_id, "listing_id": listing.listing_id}

    def list_for_sale(self, actor_id: str, token_id: int, price: int) -> dict:
        with self.lock:
            self.marketplace.check_list(actor_id, token_id, price)
            tx = self._build_tx(TxKind.LIST, actor_id, {"token_id": token_id, "price": price})
            listing = self._append_tx(tx)
            return listing.to_json()

    def cancel(self, actor_id: str, listing_id: int) -> dict:
        with self.lock:
            self.marketplace.check_cancel(actor_id, listing_id)
            tx = self._build_tx(TxKind.CANCEL, actor_id, {"listing_id": listing_id})
            listing = self._append_tx(tx)
            return listing.to_json()

    def buy(self, actor_id: str, listing_id: int) -> dict:
        with self.lock:
            fee = self.profile.tx_fee_nanousd
            self.marketplace.check_buy(actor_id, listing_id, fee)
            tx = self._build_tx(TxKind.BUY, actor_id, {"listing_id": listing_id}, fee=fee)
            receipt = self._append_tx(tx)
            return receipt.to_json()

    # --- reads ---

    def account_info(self, account_id: str) -> dict:
        with self.lock:
            account = self.registry.require_account(account_id)
            return {
                "account_id": account.account_id,
                "role": account.role.value,
                "balance": account.balance,
            }

    def identity_info(self, requester_id: str, account_id: str) -> dict:
        with self.lock:
            record = self.registry.lookup_identity(requester_id, account_id)
            info = self.account_info(account_id)
            info["legal_name"] = record.legal_name
            info["contact"] = record.contact
            return info

    def resolve_credential(self, credential: str) -> str | None:
        with self.lock:
            if not credential:
                return None
            return self._credentials.get(credential)

    def token_info(self, token_id: int) -> dict:
        with self.lock:
            token = self.registry.require_token(token_id)
            info = token.to_json()
            info["owner"] = self.registry.owner_of(token_id)
            return info

    def provenance_report(self, token_id: int, include_identities: bool = False) -> dict:
        with self.lock:
            return ownership_report(self.registry, token_id, include_identities)

    def trade_history(self, token_id: int) -> list[dict]:
        with self.lock:
            return [r.to_json() for r in self.marketplace.trade_history(token_id)]

    def open_listings(self, tier: str | None = None) -> list[dict]:
        with self.lock:
            if tier is not None:
                tier = ListingTier(tier.capitalize()).value
            return [l.to_json() for l in self.marketplace.open_listings(tier)]

    def snapshot(self) -> AnalyticsSnapshot:
        with self.lock:
            if self._snapshot is None:
                self._snapshot = self._take_snapshot()
            return self._snapshot

    def _take_snapshot(self) -> AnalyticsSnapshot:
        height = self.blocks[-1].header.height if self.blocks else 0
        return take_snapshot(self.registry, self.marketplace, self.store, height)

    def head(self) -> dict:
        with self.lock:
            tip = self.blocks[-1]
            return {
                "height": tip.header.height,
                "digest": block_digest(tip.header, self.hasher).hex,
                "timestamp": tip.header.timestamp,
                "tx_count": tip.header.tx_count,
            }

    def block_line(self, height: int) -> bytes:
        with self.lock:
            if not 0 <= height < len(self.blocks):
                raise NotFound(f"no block at height {height}")
            return encode_block_line(self.blocks[height], self.hasher)

    def verify(self) -> VerificationReport:
        with self.lock:
            return verify_chain(self.blocks, self.hasher)

    def inclusion_proof(self, height: int, tx_index: int) -> dict:
        with self.lock:
            if not 0 <= height < len(self.blocks):
                raise NotFound(f"no block at height {height}")
            block = self.blocks[height]
            steps = merkle_proof(block, tx_index, self.hasher)
            return {
                "height": height,
                "tx_index": tx_index,
                "leaf": block.transactions[tx_index].id.hex,
                "root": block.header.merkle_root.hex,
                "path": [s.to_json() for s in steps],
            }
