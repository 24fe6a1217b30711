"""Fixed-price listings and settlement.

Primary tier covers a token's first sale, Secondary everything after. The
issuer collects a royalty (basis points of price, floored) on every Secondary
sale; the buyer additionally pays the platform profile's network fee into the
fee sink. Settlement is atomic and conserves money exactly: deposits are the
only money-creation events.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .errors import (
    AlreadyListed,
    InsufficientFunds,
    InvalidAmount,
    ListingClosed,
    NotIssuer,
    NotOwner,
    NotSeller,
    SelfTrade,
    UnknownListing,
)
from .registry import Registry, Role

ROYALTY_DENOMINATOR = 10_000


@dataclass
class Listing:
    listing_id: int
    token_id: int
    seller: str
    price: int  # nanoUSD
    tier: str  # "Primary" | "Secondary"
    status: str  # "Open" | "Filled" | "Cancelled"
    created_at: int  # block height

    def to_json(self) -> dict:
        return {
            "listing_id": self.listing_id,
            "token_id": self.token_id,
            "seller": self.seller,
            "price": self.price,
            "tier": self.tier,
            "status": self.status,
            "created_at": self.created_at,
        }


class ListingTier(str, Enum):
    PRIMARY = "Primary"
    SECONDARY = "Secondary"


class ListingStatus(str, Enum):
    OPEN = "Open"
    FILLED = "Filled"
    CANCELLED = "Cancelled"


@dataclass(frozen=True)
class SettlementReceipt:
    listing_id: int
    token_id: int
    buyer: str
    seller: str
    price: int
    royalty: int
    seller_credit: int
    network_fee: int
    block_height: int

    def to_json(self) -> dict:
        return {
            "listing_id": self.listing_id,
            "token_id": self.token_id,
            "buyer": self.buyer,
            "seller": self.seller,
            "price": self.price,
            "royalty": self.royalty,
            "seller_credit": self.seller_credit,
            "network_fee": self.network_fee,
            "block_height": self.block_height,
        }


def royalty_amount(price: int, royalty_bps: int, tier: str) -> int:
    if tier != ListingTier.SECONDARY.value:
        return 0
    return price * royalty_bps // ROYALTY_DENOMINATOR


class Marketplace:
    """Mutable market state over a shared registry; mutations arrive via applied transactions."""

    def __init__(self, registry: Registry, royalty_bps: int):
        self.registry = registry
        self.royalty_bps = royalty_bps
        self.listings: dict[int, Listing] = {}
        self.open_listing_by_token: dict[int, int] = {}
        self.receipts_by_token: dict[int, list[SettlementReceipt]] = {}
        self.next_listing_id: int = 1
        self.fee_sink: int = 0
        self.total_trade_volume: int = 0
        self.total_deposited: int = 0

    # --- reads ---

    def require_listing(self, listing_id: int) -> Listing:
        listing = self.listings.get(listing_id)
        if listing is None:
            raise UnknownListing(f"no listing {listing_id}")
        return listing

    def open_listings(self, tier: str | None = None) -> list[Listing]:
        out = [l for l in self.listings.values() if l.status == ListingStatus.OPEN.value]
        if tier is not None:
            out = [l for l in out if l.tier == tier]
        return out

    def open_counts(self) -> tuple[int, int]:
        primary = secondary = 0
        for listing in self.listings.values():
            if listing.status != ListingStatus.OPEN.value:
                continue
            if listing.tier == ListingTier.PRIMARY.value:
                primary += 1
            else:
                secondary += 1
        return primary, secondary

    def trade_history(self, token_id: int) -> list[SettlementReceipt]:
        self.registry.require_token(token_id)
        return list(self.receipts_by_token.get(token_id, []))

    # --- command validation (raises; mutates nothing) ---

    def check_list(self, seller_id: str, token_id: int, price: int) -> None:
        self.registry.require_account(seller_id)
        if price < 0:
            raise InvalidAmount("listing price must be non-negative")
        if self.registry.owner_of(token_id) != seller_id:
            raise NotOwner(f"{seller_id} does not own token {token_id}")
        if token_id in self.open_listing_by_token:
            raise AlreadyListed(f"token {token_id} already has an open listing")

    def check_cancel(self, seller_id: str, listing_id: int) -> None:
        listing = self.require_listing(listing_id)
        if listing.status != ListingStatus.OPEN.value:
            raise ListingClosed(f"listing {listing_id} is {listing.status}")
        if listing.seller != seller_id:
            raise NotSeller(f"listing {listing_id} was not created by {seller_id}")

    def check_buy(self, buyer_id: str, listing_id: int, network_fee: int) -> None:
        buyer = self.registry.require_account(buyer_id)
        listing = self.require_listing(listing_id)
        if listing.status != ListingStatus.OPEN.value:
            raise ListingClosed(f"listing {listing_id} is {listing.status}")
        if listing.seller == buyer_id:
            raise SelfTrade("buyer and seller must differ")
        if buyer.balance < listing.price + network_fee:
            raise InsufficientFunds(
                f"balance {buyer.balance} below price {listing.price} plus fee {network_fee}"
            )

    def check_deposit(self, actor_id: str, account_id: str, amount: int) -> None:
        actor = self.registry.require_account(actor_id)
        if actor.role is not Role.ISSUER_ADMIN:
            raise NotIssuer("only the issuer can deposit funds")
        self.registry.require_account(account_id)
        if amount <= 0:
            raise InvalidAmount("deposit amount must be positive")

    # --- transaction application (trusts chain-recorded payloads) ---

    def apply_list(self, seller_id: str, payload: dict, height: int) -> Listing:
        token_id = payload["token_id"]
        tier = (
            ListingTier.SECONDARY.value
            if self.registry.purchase_count(token_id) >= 1
            else ListingTier.PRIMARY.value
        )
        listing = Listing(
            listing_id=self.next_listing_id,
            token_id=token_id,
            seller=seller_id,
            price=payload["price"],
            tier=tier,
            status=ListingStatus.OPEN.value,
            created_at=height,
        )
        self.listings[listing.listing_id] = listing
        self.open_listing_by_token[token_id] = listing.listing_id
        self.next_listing_id += 1
        return listing

    def apply_cancel(self, payload: dict) -> Listing:
        listing = self.listings[payload["listing_id"]]
        listing.status = ListingStatus.CANCELLED.value
        self.open_listing_by_token.pop(listing.token_id, None)
        return listing

    def apply_deposit(self, payload: dict) -> int:
        account = self.registry.accounts[payload["account_id"]]
        account.balance += payload["amount"]
        self.total_deposited += payload["amount"]
        return account.balance

    def apply_buy(self, buyer_id: str, payload: dict, network_fee: int, height: int) -> SettlementReceipt:
        listing = self.listings[payload["listing_id"]]
        price = listing.price
        royalty = royalty_amount(price, self.royalty_bps, listing.tier)
        receipt = SettlementReceipt(
            listing_id=listing.listing_id,
            token_id=listing.token_id,
            buyer=buyer_id,
            seller=listing.seller,
            price=price,
            royalty=royalty,
            seller_credit=price - royalty,
            network_fee=network_fee,
            block_height=height,
        )
        buyer = self.registry.accounts[buyer_id]
        seller = self.registry.accounts[listing.seller]
        issuer = self.registry.accounts[self.registry.tokens[listing.token_id].issuer]
        buyer.balance -= price + network_fee
        seller.balance += receipt.seller_credit
        issuer.balance += royalty
        self.fee_sink += network_fee
        self.registry.transfer(listing.token_id, listing.seller, buyer_id, receipt)
        listing.status = ListingStatus.FILLED.value
        self.open_listing_by_token.pop(listing.token_id, None)
        self.receipts_by_token.setdefault(listing.token_id, []).append(receipt)
        self.total_trade_volume += price
        return receipt
