import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from carbonledger import Hasher


@pytest.fixture
def hasher():
    return Hasher()


@pytest.fixture
def digests(hasher):
    def make(n, tag=b""):
        return [hasher.digest(tag + i.to_bytes(4, "big")) for i in range(n)]

    return make
