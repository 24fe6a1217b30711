"""Dashboard counters and ownership reports derived from market state.

Counters are denormalized for O(1) reads but always recomputable by folding
the exported block log; snapshots are taken at block commit so every snapshot
is consistent with one committed chain height.
"""

from __future__ import annotations

from dataclasses import dataclass

from .market import Marketplace
from .registry import Registry
from .store import ContentStore


@dataclass(frozen=True)
class AnalyticsSnapshot:
    total_minted: int
    total_certificates_uploaded: int
    duplicate_attempts: int
    open_primary: int
    open_secondary: int
    total_trade_volume: int
    as_of_height: int

    def to_json(self) -> dict:
        return {
            "total_minted": self.total_minted,
            "total_certificates_uploaded": self.total_certificates_uploaded,
            "duplicate_attempts": self.duplicate_attempts,
            "open_primary": self.open_primary,
            "open_secondary": self.open_secondary,
            "total_trade_volume": self.total_trade_volume,
            "as_of_height": self.as_of_height,
        }


def take_snapshot(
    registry: Registry, marketplace: Marketplace, store: ContentStore, height: int
) -> AnalyticsSnapshot:
    open_primary, open_secondary = marketplace.open_counts()
    return AnalyticsSnapshot(
        total_minted=registry.total_minted,
        total_certificates_uploaded=store.uploaded_count(),
        duplicate_attempts=registry.duplicate_attempts,
        open_primary=open_primary,
        open_secondary=open_secondary,
        total_trade_volume=marketplace.total_trade_volume,
        as_of_height=height,
    )


def ownership_report(registry: Registry, token_id: int, include_identities: bool) -> dict:
    """Ordered owner list for a token; legal names only for issuer requests."""
    provenance = registry.provenance(token_id)
    entries = []
    for entry in provenance.entries:
        row = entry.to_json()
        account = registry.accounts.get(entry.owner)
        row["role"] = account.role.value if account else None
        if include_identities:
            identity = registry.identities.get(entry.owner)
            row["legal_name"] = identity.legal_name if identity else None
        entries.append(row)
    return {"token_id": token_id, "entries": entries}
