"""Platform profiles: throughput and per-transaction fee parameters.

The shipped profile file carries the six supported platforms with fees stored
as integer nanoUSD (1 USD = 10^9 nanoUSD) so all fee arithmetic is exact.
Profiles parameterize block capacity and the network fee; they do not model
consensus protocols.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources

from .errors import ConfigInvalid


@dataclass(frozen=True)
class PlatformProfile:
    name: str
    throughput_tps: float
    tx_fee_nanousd: int
    consensus_label: str

    def capacity(self, block_interval_s: float) -> int:
        """Max transactions per block: floor(tps * interval), at least 1."""
        return max(1, math.floor(self.throughput_tps * block_interval_s))

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "throughput_tps": self.throughput_tps,
            "tx_fee_nanousd": self.tx_fee_nanousd,
            "consensus_label": self.consensus_label,
        }


def shipped_profiles() -> dict[str, PlatformProfile]:
    raw = json.loads(resources.files("carbonledger.data").joinpath("profiles.json").read_text())
    return {
        key: PlatformProfile(
            name=entry["name"],
            throughput_tps=entry["throughput_tps"],
            tx_fee_nanousd=entry["tx_fee_nanousd"],
            consensus_label=entry["consensus_label"],
        )
        for key, entry in raw.items()
    }


def get_profile(name: str) -> PlatformProfile:
    profiles = shipped_profiles()
    key = name.strip().lower()
    if key not in profiles:
        raise ConfigInvalid(f"unknown platform profile {name!r}", detail=f"known: {sorted(profiles)}")
    return profiles[key]
