"""Merkle root and inclusion proofs against an independent brute-force oracle."""

import hashlib
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from carbonledger import Digest, Hasher, compute_merkle_root
from carbonledger.errors import EmptyLeafSet, IndexOutOfRange
from carbonledger.merkle import build_inclusion_proof, verify_inclusion_proof


def oracle_root(leaves: list[bytes]) -> bytes:
    """Level-by-level tree builder, padding odd levels by repeating the tail."""
    level = list(leaves)
    while len(level) > 1:
        if len(level) % 2 == 1:
            level = level + [level[-1]]
        level = [
            hashlib.sha256(level[i] + level[i + 1]).digest() for i in range(0, len(level), 2)
        ]
    return level[0]


def test_single_leaf_root_is_the_leaf(hasher, digests):
    (leaf,) = digests(1)
    assert compute_merkle_root([leaf], hasher) == leaf


def test_two_leaves_concatenate_and_hash(hasher, digests):
    a, b = digests(2)
    expected = hashlib.sha256(a.value + b.value).digest()
    assert compute_merkle_root([a, b], hasher).value == expected


def test_three_leaves_pair_odd_node_with_itself(hasher, digests):
    a, b, c = digests(3)
    left = hashlib.sha256(a.value + b.value).digest()
    right = hashlib.sha256(c.value + c.value).digest()
    expected = hashlib.sha256(left + right).digest()
    assert compute_merkle_root([a, b, c], hasher).value == expected


def test_empty_leaf_set_rejected(hasher):
    with pytest.raises(EmptyLeafSet):
        compute_merkle_root([], hasher)


def test_matches_oracle_for_all_small_sizes(hasher):
    rng = random.Random(7)
    for n in range(1, 17):
        for _ in range(25):
            raw = [rng.randbytes(32) for _ in range(n)]
            leaves = [Digest(r) for r in raw]
            assert compute_merkle_root(leaves, hasher).value == oracle_root(raw)


@settings(max_examples=120, deadline=None)
@given(st.lists(st.binary(min_size=32, max_size=32), min_size=1, max_size=16))
def test_matches_oracle_property(raw):
    hasher = Hasher()
    assert compute_merkle_root([Digest(r) for r in raw], hasher).value == oracle_root(raw)


def test_every_proof_verifies_and_tampered_leaves_fail(hasher):
    rng = random.Random(11)
    for n in range(1, 17):
        raw = [rng.randbytes(32) for _ in range(n)]
        leaves = [Digest(r) for r in raw]
        root = compute_merkle_root(leaves, hasher)
        for index in range(n):
            proof = build_inclusion_proof(leaves, index, hasher)
            if n == 1:
                assert proof == []
            assert verify_inclusion_proof(leaves[index], proof, root, hasher)
            altered = Digest(bytes([raw[index][0] ^ 1]) + raw[index][1:])
            assert not verify_inclusion_proof(altered, proof, root, hasher)


def test_proof_against_wrong_root_fails(hasher, digests):
    leaves = digests(5)
    root = compute_merkle_root(leaves, hasher)
    other = compute_merkle_root(leaves[:4], hasher)
    proof = build_inclusion_proof(leaves, 2, hasher)
    assert verify_inclusion_proof(leaves[2], proof, root, hasher)
    assert not verify_inclusion_proof(leaves[2], proof, other, hasher)


def test_proof_index_out_of_range(hasher, digests):
    leaves = digests(3)
    with pytest.raises(IndexOutOfRange):
        build_inclusion_proof(leaves, 3, hasher)


def test_digest_hex_round_trip():
    value = bytes(range(32))
    digest = Digest(value)
    assert Digest.from_hex(digest.hex) == digest
    with pytest.raises(ValueError):
        Digest(b"short")
    with pytest.raises(ValueError):
        Digest.from_hex("ZZ" * 32)
