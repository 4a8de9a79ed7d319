"""Scheme variants and their parameter sets."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from ..algebra import WeightKind, check_modulus, sphere_count
from ..primitives import HashSuite

ROUNDS_PER_GROUP = 4
DEFAULT_GROUPS = 55


class Variant(enum.Enum):
    GENERIC = "generic"        # randomized commitments, full strings revealed
    VULNERABLE = "vulnerable"  # seeds + deterministic commitments, no salt
    SALTED = "salted"          # seeds + commitments bound to (salt, index)
    TREE = "tree"              # salted, with rounds fused four at a time

    @property
    def wire_tag(self) -> int:
        return list(Variant).index(self)

    @classmethod
    def from_wire(cls, tag: int) -> "Variant":
        return list(Variant)[tag]

    @property
    def seeded(self) -> bool:
        return self is not Variant.GENERIC

    @property
    def salted(self) -> bool:
        return self in (Variant.SALTED, Variant.TREE)


def default_rounds(variant: Variant, l_seed: int) -> int:
    if variant is Variant.TREE:
        return ROUNDS_PER_GROUP * DEFAULT_GROUPS
    return math.ceil(l_seed * math.log2(3))


@dataclass(frozen=True)
class SchemeParams:
    variant: Variant
    n: int
    k: int
    w: int
    q: int
    kind: WeightKind = WeightKind.HAMMING
    rounds: int = field(default=0)
    l_seed: int = 128
    l_comm: int = 256
    l_salt: int = 256

    def __post_init__(self):
        check_modulus(self.q)
        if not 0 < self.k < self.n:
            raise ValueError("need 0 < k < n")
        if self.n > 256:
            raise ValueError("n > 256 does not fit the one-byte permutation encoding")
        if sphere_count(self.n, self.q, self.w, self.kind) == 0:
            raise ValueError(f"no vector of weight {self.w} in F_{self.q}^{self.n} ({self.kind.value})")
        if self.rounds == 0:
            object.__setattr__(self, "rounds", default_rounds(self.variant, self.l_seed))
        if self.rounds < 1:
            raise ValueError("rounds must be positive")
        if self.variant is Variant.TREE and self.rounds % ROUNDS_PER_GROUP:
            raise ValueError("the tree variant needs a multiple of 4 rounds")
        if self.variant.salted and self.l_salt < 8:
            raise ValueError("salted variants need l_salt >= 8")
        HashSuite(self.l_seed, self.l_comm, self.l_salt)

    @property
    def suite(self) -> HashSuite:
        return HashSuite(self.l_seed, self.l_comm, self.salt_bits)

    @property
    def salt_bits(self) -> int:
        return self.l_salt if self.variant.salted else 0

    @property
    def groups(self) -> int:
        return self.rounds // ROUNDS_PER_GROUP

    @property
    def index_count(self) -> int:
        """Salted calls per signature, global commitment included."""
        if self.variant is Variant.TREE:
            return 6 * self.rounds + 15 * self.groups + 1
        if self.variant is Variant.SALTED:
            return 6 * self.rounds + 1
        return 0

    def replace(self, **kw) -> "SchemeParams":
        d = {f: getattr(self, f) for f in self.__dataclass_fields__}
        d.update(kw)
        return SchemeParams(**d)


@dataclass(frozen=True)
class Verdict:
    ok: bool
    reason: str = "ok"
    malformed: bool = False

    def __bool__(self) -> bool:
        return self.ok


class Reject(Exception):
    """Raised inside verification; turned into a failing Verdict at the boundary."""

    def __init__(self, reason: str, malformed: bool = False):
        super().__init__(reason)
        self.reason = reason
        self.malformed = malformed

    def verdict(self) -> Verdict:
        return Verdict(False, self.reason, self.malformed)
