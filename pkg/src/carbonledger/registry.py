"""Accounts, role-gated identity privacy, and the certificate token registry.

Identity records (legal name, contact) and bearer credentials live strictly
off-chain; chain payloads carry only opaque account ids and roles. Tokens are
minted solely by the one issuer account, deduplicated by certificate digest,
and tracked with full owner provenance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from enum import Enum

from .canonical import Digest
from .errors import (
    DuplicateIssuer,
    Forbidden,
    InvalidAmount,
    InvalidContext,
    NotIssuer,
    NotOwner,
    UnknownAccount,
    UnknownToken,
)


class Role(str, Enum):
    ISSUER_ADMIN = "IssuerAdmin"
    TRADER = "Trader"


@dataclass
class Account:
    account_id: str
    role: Role
    balance: int = 0
    nonce: int = 0
    credential: str = ""  # bearer secret, never serialized on-chain


@dataclass(frozen=True)
class IdentityRecord:
    account_id: str
    legal_name: str
    contact: str


@dataclass(frozen=True)
class TokenMetadata:
    name: str
    symbol: str
    project_id: str
    quantity_tco2e: str  # decimal string, tonnes CO2-equivalent
    vintage_year: int
    metadata_uri: str

    def validate(self) -> None:
        if not self.name or not self.symbol:
            raise InvalidAmount("token name and symbol must be nonempty")
        try:
            quantity = Decimal(self.quantity_tco2e)
        except InvalidOperation:
            raise InvalidAmount(f"quantity_tco2e {self.quantity_tco2e!r} is not a decimal")
        if quantity <= 0:
            raise InvalidAmount("quantity_tco2e must be positive")


@dataclass(frozen=True)
class CarbonCreditToken:
    token_id: int
    name: str
    symbol: str
    project_id: str
    quantity_tco2e: str
    vintage_year: int
    metadata_uri: str
    certificate_hash: Digest
    issuer: str
    minted_at: int  # block height

    def to_json(self) -> dict:
        return {
            "token_id": self.token_id,
            "name": self.name,
            "symbol": self.symbol,
            "project_id": self.project_id,
            "quantity_tco2e": self.quantity_tco2e,
            "vintage_year": self.vintage_year,
            "metadata_uri": self.metadata_uri,
            "certificate_hash": self.certificate_hash.hex,
            "issuer": self.issuer,
            "minted_at": self.minted_at,
        }


BASIS_MINTED = "Minted"
BASIS_PURCHASED = "Purchased"


@dataclass(frozen=True)
class ProvenanceEntry:
    owner: str
    acquired_at: int  # block height
    basis: str
    price: int | None = None  # nanoUSD, purchases only

    def to_json(self) -> dict:
        return {
            "owner": self.owner,
            "acquired_at": self.acquired_at,
            "basis": self.basis,
            "price": self.price,
        }


@dataclass
class Provenance:
    token_id: int
    entries: list[ProvenanceEntry] = field(default_factory=list)


class Registry:
    """Mutable registry state; mutations arrive only via applied transactions."""

    def __init__(self):
        self.accounts: dict[str, Account] = {}
        self.identities: dict[str, IdentityRecord] = {}
        self.tokens: dict[int, CarbonCreditToken] = {}
        self.provenances: dict[int, Provenance] = {}
        self.used_certificates: set[str] = set()
        self.issuer_id: str | None = None
        self.next_token_id: int = 1
        self.total_minted: int = 0
        self.duplicate_attempts: int = 0

    # --- reads ---

    def require_account(self, account_id: str) -> Account:
        account = self.accounts.get(account_id)
        if account is None:
            raise UnknownAccount(f"no account {account_id}")
        return account

    def require_token(self, token_id: int) -> CarbonCreditToken:
        token = self.tokens.get(token_id)
        if token is None:
            raise UnknownToken(f"no token {token_id}")
        return token

    def owner_of(self, token_id: int) -> str:
        self.require_token(token_id)
        return self.provenances[token_id].entries[-1].owner

    def provenance(self, token_id: int) -> Provenance:
        self.require_token(token_id)
        return self.provenances[token_id]

    def purchase_count(self, token_id: int) -> int:
        return len(self.provenance(token_id).entries) - 1

    def total_supply(self) -> int:
        return self.total_minted

    def lookup_identity(self, requester_id: str, account_id: str) -> IdentityRecord:
        requester = self.require_account(requester_id)
        target = self.require_account(account_id)
        if requester.role is not Role.ISSUER_ADMIN and requester_id != account_id:
            raise Forbidden("identity records are visible to the issuer and the account itself")
        record = self.identities.get(target.account_id)
        if record is None:
            raise UnknownAccount(f"no identity record for {account_id}")
        return record

    # --- command validation (raises; mutates nothing) ---

    def check_register(self, actor_id: str, role: Role) -> None:
        actor = self.require_account(actor_id)
        if actor.role is not Role.ISSUER_ADMIN:
            raise NotIssuer("only the issuer can register accounts")
        if role is Role.ISSUER_ADMIN and self.issuer_id is not None:
            raise DuplicateIssuer("the deployment already has an issuer account")

    def check_mint(self, actor_id: str) -> None:
        actor = self.require_account(actor_id)
        if actor.role is not Role.ISSUER_ADMIN:
            raise NotIssuer("only the issuer can mint tokens")

    # --- transaction application (trusts chain-recorded payloads) ---

    def apply_register(self, payload: dict) -> Account:
        account = Account(account_id=payload["account_id"], role=Role(payload["role"]))
        self.accounts[account.account_id] = account
        if account.role is Role.ISSUER_ADMIN:
            self.issuer_id = account.account_id
        return account

    def apply_mint(self, actor_id: str, payload: dict, height: int) -> CarbonCreditToken | None:
        """Create the token, or count a duplicate attempt if the certificate is taken."""
        certificate_hex = payload["certificate_hash"]
        if certificate_hex in self.used_certificates:
            self.duplicate_attempts += 1
            return None
        token = CarbonCreditToken(
            token_id=self.next_token_id,
            name=payload["name"],
            symbol=payload["symbol"],
            project_id=payload["project_id"],
            quantity_tco2e=payload["quantity_tco2e"],
            vintage_year=payload["vintage_year"],
            metadata_uri=payload["metadata_uri"],
            certificate_hash=Digest.from_hex(certificate_hex),
            issuer=actor_id,
            minted_at=height,
        )
        self.tokens[token.token_id] = token
        self.provenances[token.token_id] = Provenance(
            token_id=token.token_id,
            entries=[ProvenanceEntry(owner=actor_id, acquired_at=height, basis=BASIS_MINTED)],
        )
        self.used_certificates.add(certificate_hex)
        self.next_token_id += 1
        self.total_minted += 1
        return token

    def transfer(self, token_id: int, frm: str, to: str, receipt) -> None:
        """Ownership transfer; internal, invoked only by marketplace settlement."""
        if self.owner_of(token_id) != frm:
            raise NotOwner(f"{frm} does not own token {token_id}")
        if receipt.seller != frm or receipt.buyer != to:
            raise InvalidContext("settlement receipt does not match the transfer parties")
        self.provenances[token_id].entries.append(
            ProvenanceEntry(
                owner=to,
                acquired_at=receipt.block_height,
                basis=BASIS_PURCHASED,
                price=receipt.price,
            )
        )
