"""Merkle root and inclusion proofs over ordered digest lists.

Conventions: a single-leaf tree's root is the leaf itself; an odd node at any
level is paired with itself. Inner nodes hash the concatenation of the two
child digests.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .canonical import Digest, Hasher
from .errors import EmptyLeafSet, IndexOutOfRange


@dataclass(frozen=True)
class ProofStep:
    sibling: Digest
    sibling_on_left: bool

    def to_json(self) -> dict:
        return {"sibling": self.sibling.hex, "sibling_on_left": self.sibling_on_left}

    @classmethod
    def from_json(cls, obj: dict) -> "ProofStep":
        return cls(Digest.from_hex(obj["sibling"]), bool(obj["sibling_on_left"]))


def _next_level(level: list[Digest], hasher: Hasher) -> list[Digest]:
    out = []
    for i in range(0, len(level), 2):
        left = level[i]
        right = level[i + 1] if i + 1 < len(level) else left
        out.append(hasher.digest(left.value + right.value))
    return out


def compute_merkle_root(leaves: Sequence[Digest], hasher: Hasher) -> Digest:
    if not leaves:
        raise EmptyLeafSet("merkle root of an empty leaf set is undefined")
    level = list(leaves)
    while len(level) > 1:
        level = _next_level(level, hasher)
    return level[0]


def build_inclusion_proof(leaves: Sequence[Digest], index: int, hasher: Hasher) -> list[ProofStep]:
    if not leaves:
        raise EmptyLeafSet("cannot prove inclusion in an empty leaf set")
    if not 0 <= index < len(leaves):
        raise IndexOutOfRange(f"leaf index {index} out of range for {len(leaves)} leaves")
    proof = []
    level = list(leaves)
    while len(level) > 1:
        sibling_index = index ^ 1
        # Odd last node pairs with itself.
        sibling = level[sibling_index] if sibling_index < len(level) else level[index]
        proof.append(ProofStep(sibling=sibling, sibling_on_left=bool(index & 1)))
        level = _next_level(level, hasher)
        index //= 2
    return proof


def verify_inclusion_proof(
    leaf: Digest, proof: Sequence[ProofStep], root: Digest, hasher: Hasher
) -> bool:
    node = leaf
    for step in proof:
        if step.sibling_on_left:
            node = hasher.digest(step.sibling.value + node.value)
        else:
            node = hasher.digest(node.value + step.sibling.value)
    return node == root
