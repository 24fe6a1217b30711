"""Shared test helpers: independent oracles and a random market fuzzer.

The fold oracle deliberately re-implements the chain semantics from scratch
over raw JSON log lines (no package state machinery) so replay-equivalence
tests compare two genuinely independent interpretations.
"""

from __future__ import annotations

import json
import random
import threading
import time
from dataclasses import dataclass, field
from fractions import Fraction

from carbonledger import Digest, Hasher, MarketError, Role, TokenMetadata
from carbonledger.engine import ManualClock, MarketEngine
from carbonledger.store import ContentStore


def start_http_server(service, ui_dir=None):
    """Run the real ASGI server on an ephemeral port; returns (server, thread, url)."""
    import uvicorn

    from carbonledger.http import create_app

    app = create_app(service, ui_dir=ui_dir)
    config = uvicorn.Config(app, host="127.0.0.1", port=0, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 15
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("http server failed to start")
        time.sleep(0.01)
    port = server.servers[0].sockets[0].getsockname()[1]
    return server, thread, f"http://127.0.0.1:{port}"


def stop_http_server(server, thread):
    server.should_exit = True
    thread.join(timeout=15)


# --- independent fold oracle over exported block-log lines ---


@dataclass
class FoldState:
    balances: dict = field(default_factory=dict)  # account -> int
    roles: dict = field(default_factory=dict)
    tokens: dict = field(default_factory=dict)  # token_id -> cert hex
    token_issuer: dict = field(default_factory=dict)
    owners: dict = field(default_factory=dict)  # token_id -> account
    provenance: dict = field(default_factory=dict)  # token_id -> [(owner, height, basis, price)]
    purchases: dict = field(default_factory=dict)  # token_id -> count
    listings: dict = field(default_factory=dict)  # listing_id -> dict
    open_by_token: dict = field(default_factory=dict)
    used_certs: set = field(default_factory=set)
    receipts: dict = field(default_factory=dict)  # token_id -> [receipt dict]
    total_minted: int = 0
    duplicate_attempts: int = 0
    total_trade_volume: int = 0
    fee_sink: int = 0
    total_deposited: int = 0
    next_token_id: int = 1
    next_listing_id: int = 1

    def money_delta(self) -> int:
        """sum(balances) + fee_sink - sum(deposits); zero iff money conserved."""
        return sum(self.balances.values()) + self.fee_sink - self.total_deposited

    def open_counts(self) -> tuple[int, int]:
        primary = sum(
            1 for l in self.listings.values() if l["status"] == "Open" and l["tier"] == "Primary"
        )
        secondary = sum(
            1 for l in self.listings.values() if l["status"] == "Open" and l["tier"] == "Secondary"
        )
        return primary, secondary


def fold_line(state: FoldState, line: bytes, royalty_bps: int) -> FoldState:
    block = json.loads(line.decode("utf-8"))
    height = block["header"]["height"]
    for tx in block["transactions"]:
        kind, actor, payload = tx["kind"], tx["actor"], tx["payload"]
        if kind == "Genesis":
            continue
        if kind == "RegisterAccount":
            state.balances[payload["account_id"]] = 0
            state.roles[payload["account_id"]] = payload["role"]
        elif kind == "Deposit":
            state.balances[payload["account_id"]] += payload["amount"]
            state.total_deposited += payload["amount"]
        elif kind == "Mint":
            cert = payload["certificate_hash"]
            if cert in state.used_certs:
                state.duplicate_attempts += 1
            else:
                token_id = state.next_token_id
                state.next_token_id += 1
                state.used_certs.add(cert)
                state.tokens[token_id] = cert
                state.token_issuer[token_id] = actor
                state.owners[token_id] = actor
                state.provenance[token_id] = [(actor, height, "Minted", None)]
                state.purchases[token_id] = 0
                state.total_minted += 1
        elif kind == "List":
            token_id = payload["token_id"]
            tier = "Secondary" if state.purchases[token_id] >= 1 else "Primary"
            listing_id = state.next_listing_id
            state.next_listing_id += 1
            state.listings[listing_id] = {
                "listing_id": listing_id,
                "token_id": token_id,
                "seller": actor,
                "price": payload["price"],
                "tier": tier,
                "status": "Open",
                "created_at": height,
            }
            state.open_by_token[token_id] = listing_id
        elif kind == "Cancel":
            listing = state.listings[payload["listing_id"]]
            listing["status"] = "Cancelled"
            state.open_by_token.pop(listing["token_id"], None)
        elif kind == "Buy":
            listing = state.listings[payload["listing_id"]]
            price = listing["price"]
            royalty = (price * royalty_bps) // 10_000 if listing["tier"] == "Secondary" else 0
            fee = tx["fee"]
            token_id = listing["token_id"]
            state.balances[actor] -= price + fee
            state.balances[listing["seller"]] += price - royalty
            state.balances[state.token_issuer[token_id]] += royalty
            state.fee_sink += fee
            state.total_trade_volume += price
            state.owners[token_id] = actor
            state.provenance[token_id].append((actor, height, "Purchased", price))
            state.purchases[token_id] += 1
            listing["status"] = "Filled"
            state.open_by_token.pop(token_id, None)
            state.receipts.setdefault(token_id, []).append(
                {
                    "listing_id": listing["listing_id"],
                    "token_id": token_id,
                    "buyer": actor,
                    "seller": listing["seller"],
                    "price": price,
                    "royalty": royalty,
                    "seller_credit": price - royalty,
                    "network_fee": fee,
                    "block_height": height,
                    "tier": listing["tier"],
                }
            )
        else:
            raise AssertionError(f"unknown kind {kind}")
    return state


def fold_log(lines: list[bytes], royalty_bps: int) -> FoldState:
    state = FoldState()
    for line in lines:
        fold_line(state, line, royalty_bps)
    return state


def exact_royalty(price: int, royalty_bps: int) -> int:
    """Exact-rational royalty oracle: floor(price * bps / 10000)."""
    return int(Fraction(price * royalty_bps, 10_000))


# --- engine factory & fuzzer ---


def make_engine(tmp_path, profile, block_interval_s=1.0, royalty_bps=500, clock=None, algo="sha256"):
    from carbonledger import get_profile

    clock = clock or ManualClock()
    hasher = Hasher(algo)
    store = ContentStore(tmp_path / "objects", hasher, now_ms=clock.now_ms)
    engine = MarketEngine(
        hasher=hasher,
        profile=get_profile(profile) if isinstance(profile, str) else profile,
        block_interval_s=block_interval_s,
        royalty_bps=royalty_bps,
        store=store,
        clock=clock,
    )
    return engine, clock


LEGAL_NAMES = [
    "Aurora Verde Holdings",
    "Quetzal Offset Partners",
    "Windward Peat Consortium",
    "Sable Basin Renewables",
    "Tidemark Agroforestry",
    "Juniper Flats Energy",
    "Meridian Loam Cooperative",
    "Oxbow Prairie Trust",
]


@dataclass
class FuzzStats:
    commands: int = 0
    deposits_total: int = 0
    duplicates_injected: int = 0
    rejected: dict = field(default_factory=dict)
    legal_names: list = field(default_factory=list)


class MarketFuzzer:
    """Random but precondition-aware command stream against a MarketEngine.

    Tracks exactly what it injected so tests can assert counters without
    consulting the engine's own bookkeeping.
    """

    def __init__(self, engine: MarketEngine, clock: ManualClock, issuer_id: str, seed: int = 0,
                 advance_ms: tuple[int, int] = (0, 400)):
        self.engine = engine
        self.clock = clock
        self.issuer_id = issuer_id
        self.rng = random.Random(seed)
        self.advance_ms = advance_ms
        self.traders: list[str] = []
        self.cert_seq = 0
        self.minted_certs: list[str] = []
        self.stats = FuzzStats()

    def _advance(self) -> None:
        lo, hi = self.advance_ms
        if hi > lo:
            self.clock.advance(self.rng.randint(lo, hi))
        self.engine.maybe_cut()

    def _record(self, fn, *args):
        self.stats.commands += 1
        try:
            result = fn(*args)
        except MarketError as exc:
            self.stats.rejected[exc.code] = self.stats.rejected.get(exc.code, 0) + 1
            result = None
        self._advance()
        return result

    def ensure_trader(self) -> str:
        if len(self.traders) < 2 or (len(self.traders) < len(LEGAL_NAMES) and self.rng.random() < 0.1):
            name = LEGAL_NAMES[len(self.traders) % len(LEGAL_NAMES)]
            self.stats.legal_names.append(name)
            result = self._record(
                self.engine.register_account, self.issuer_id, name,
                f"contact-{len(self.traders)}@example", Role.TRADER,
            )
            if result:
                self.traders.append(result["account_id"])
        return self.rng.choice(self.traders)

    def random_deposit(self):
        target = self.rng.choice(self.traders + [self.issuer_id])
        amount = self.rng.randint(1, 10) * 1_000_000_000
        result = self._record(self.engine.deposit, self.issuer_id, target, amount)
        if result is not None:
            self.stats.deposits_total += amount

    def random_mint(self):
        self.cert_seq += 1
        data = f"certificate-{self.cert_seq}".encode()
        digest_hex = self.engine.upload_certificate(self.issuer_id, data)["digest"]
        metadata = TokenMetadata(
            name=f"Credit Lot {self.cert_seq}",
            symbol=f"CL{self.cert_seq}",
            project_id=f"project-{self.cert_seq % 7}",
            quantity_tco2e=str(self.rng.randint(1, 500)),
            vintage_year=2020 + self.cert_seq % 5,
            metadata_uri="",
        )
        price = self.rng.randint(0, 4) * 50_000_000
        result = self._record(
            self.engine.mint, self.issuer_id, metadata, Digest.from_hex(digest_hex), price
        )
        if result is not None:
            self.minted_certs.append(digest_hex)

    def duplicate_mint(self):
        if not self.minted_certs:
            return
        digest_hex = self.rng.choice(self.minted_certs)
        metadata = TokenMetadata(
            name="Duplicate Attempt", symbol="DUP", project_id="",
            quantity_tco2e="1", vintage_year=2024, metadata_uri="",
        )
        self.stats.duplicates_injected += 1
        self._record(self.engine.mint, self.issuer_id, metadata, Digest.from_hex(digest_hex), 1)

    def random_list(self):
        tokens = list(self.engine.registry.tokens)
        if not tokens:
            return
        token_id = self.rng.choice(tokens)
        actor = self.engine.registry.owner_of(token_id)
        price = self.rng.randint(0, 6) * 25_000_000
        self._record(self.engine.list_for_sale, actor, token_id, price)

    def random_cancel(self):
        open_listings = self.engine.marketplace.open_listings()
        if not open_listings:
            return
        listing = self.rng.choice(open_listings)
        # sometimes the wrong actor tries to cancel
        actor = listing.seller if self.rng.random() < 0.8 else self.ensure_trader()
        self._record(self.engine.cancel, actor, listing.listing_id)

    def random_buy(self):
        open_listings = self.engine.marketplace.open_listings()
        if not open_listings:
            return
        listing = self.rng.choice(open_listings)
        buyer = self.rng.choice(self.traders + [self.issuer_id])
        self._record(self.engine.buy, buyer, listing.listing_id)

    def step(self):
        self.ensure_trader()
        roll = self.rng.random()
        if roll < 0.18:
            self.random_deposit()
        elif roll < 0.34:
            self.random_mint()
        elif roll < 0.42:
            self.duplicate_mint()
        elif roll < 0.58:
            self.random_list()
        elif roll < 0.68:
            self.random_cancel()
        else:
            self.random_buy()

    def run(self, steps: int):
        for _ in range(steps):
            self.step()
        self.engine.flush()
        return self.stats
