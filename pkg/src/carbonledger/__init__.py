"""Deterministic single-node carbon-credit market.

An append-only hash-chained ledger hosts a certificate token registry and a
primary/secondary marketplace with issuer royalties, duplicate-certificate
rejection, owner provenance, and dashboard analytics. Certificates live in a
local content-addressed store; only their digests go on-chain.
"""

from .analytics import AnalyticsSnapshot
from .canonical import Digest, Hasher, ZERO_DIGEST, canonical_bytes
from .chain import (
    Block,
    BlockHeader,
    Transaction,
    TxKind,
    VerificationReport,
    append_block,
    block_digest,
    genesis,
    merkle_proof,
    verify_chain,
    verify_merkle_proof,
)
from .engine import ManualClock, MarketEngine, SystemClock
from .errors import MarketError
from .market import Listing, ListingStatus, ListingTier, SettlementReceipt
from .merkle import compute_merkle_root
from .profiles import PlatformProfile, get_profile, shipped_profiles
from .registry import Account, CarbonCreditToken, Provenance, Role, TokenMetadata
from .service import CommandEnvelope, MarketService, ServiceConfig, load_config
from .store import ContentStore

__all__ = [
    "Account",
    "AnalyticsSnapshot",
    "Block",
    "BlockHeader",
    "CarbonCreditToken",
    "CommandEnvelope",
    "ContentStore",
    "Digest",
    "Hasher",
    "Listing",
    "ListingStatus",
    "ListingTier",
    "ManualClock",
    "MarketEngine",
    "MarketError",
    "MarketService",
    "PlatformProfile",
    "Provenance",
    "Role",
    "ServiceConfig",
    "SettlementReceipt",
    "SystemClock",
    "TokenMetadata",
    "Transaction",
    "TxKind",
    "VerificationReport",
    "ZERO_DIGEST",
    "append_block",
    "block_digest",
    "canonical_bytes",
    "compute_merkle_root",
    "genesis",
    "get_profile",
    "load_config",
    "merkle_proof",
    "shipped_profiles",
    "verify_chain",
    "verify_merkle_proof",
]
