import random

import pytest

from sternlab.algebra import WeightKind
from sternlab.problems import sample_sd
from sternlab.protocol import SchemeParams, Variant


class ForcedSeedRandom(random.Random):
    """Returns zero bytes for requests of exactly ``seed_len`` bytes, so every
    round seed (and nothing else) is the same."""

    def __new__(cls, seed, seed_len):
        return super().__new__(cls)

    def __init__(self, seed, seed_len):
        super().__init__(seed)
        self.seed_len = seed_len

    def randbytes(self, n):
        if n == self.seed_len:
            return bytes(n)
        return super().randbytes(n)


@pytest.fixture
def rng():
    return random.Random(20240611)


def desk_params(variant, q=2, kind=WeightKind.HAMMING, rounds=8, **kw):
    return SchemeParams(variant, 24, 12, 6, q, kind, rounds=rounds, **kw)


def keypair_for(params, rng):
    return sample_sd(params.n, params.k, params.w, params.q, params.kind, rng)


ALL_VARIANTS = list(Variant)
