"""Hash-based building blocks: commitments, seed expansions, seed and
commitment trees, and challenge derivation.

Every function hashes ``tag || payload [|| salt || index_le32]`` with
SHAKE256 and truncates to its declared bit length.  Bit lengths that are not
a multiple of 8 are stored in ``ceil(bits / 8)`` bytes with the unused high
bits of the last byte cleared.
"""

from __future__ import annotations

import hashlib
import hmac
import struct
from dataclasses import dataclass

import numpy as np

from .algebra import FieldVector, Permutation

TAG_COMMIT = 0x01
TAG_E0 = 0x02
TAG_E1 = 0x03
TAG_E2 = 0x04
TAG_TREE_SEED = 0x05
TAG_TREE_NODE = 0x06
TAG_CHALLENGE = 0x07
TAG_GLOBAL = 0x08

INDEX_LIMIT = 2**32 - 1


def nbytes(bits: int) -> int:
    return (bits + 7) // 8


def truncate_bits(data: bytes, bits: int) -> bytes:
    """First ``bits`` bits of ``data`` in the masked-byte layout."""
    out = bytearray(data[: nbytes(bits)])
    if bits % 8:
        out[-1] &= (1 << (bits % 8)) - 1
    return bytes(out)


def random_bits(bits: int, rng) -> bytes:
    return truncate_bits(rng.randbytes(nbytes(bits)), bits)


class SaltContext:
    """Per-signature salt plus the running call index.

    ``frozen=True`` keeps the index constant; it exists only so tests can
    show that the index is doing real work.
    """

    __slots__ = ("salt", "index", "frozen")

    def __init__(self, salt: bytes, index: int = 0, frozen: bool = False):
        self.salt = bytes(salt)
        self.index = index
        self.frozen = frozen

    def next(self) -> int:
        i = self.index
        if i >= INDEX_LIMIT:
            raise OverflowError("salt index exhausted")
        if not self.frozen:
            self.index += 1
        return i

    def at(self, index: int) -> "SaltContext":
        """Context positioned at ``index`` (what a verifier uses)."""
        return SaltContext(self.salt, self.index if self.frozen else index, self.frozen)

    def suffix(self) -> bytes:
        return self.salt + struct.pack("<I", self.next())


def _suffix(ctx: SaltContext | None) -> bytes:
    return b"" if ctx is None else ctx.suffix()


class _Stream:
    """Byte reader over a SHAKE256 output that re-squeezes longer when drained."""

    def __init__(self, prefix: bytes, initial: int):
        self._h = hashlib.shake_256(prefix)
        self._buf = self._h.digest(max(initial, 32))
        self._pos = 0

    def take(self, k: int) -> bytes:
        if self._pos + k > len(self._buf):
            self._buf = self._h.digest(2 * len(self._buf) + k)
        out = self._buf[self._pos:self._pos + k]
        self._pos += k
        return out


@dataclass(frozen=True)
class HashSuite:
    """Output lengths (bits) for every derived hash."""

    l_seed: int = 128
    l_comm: int = 256
    l_salt: int = 256

    def __post_init__(self):
        for name in ("l_seed", "l_comm"):
            if getattr(self, name) < 8:
                raise ValueError(f"{name} must be at least 8 bits")
        if self.l_salt < 0:
            raise ValueError("l_salt must be nonnegative")

    @property
    def seed_bytes(self) -> int:
        return nbytes(self.l_seed)

    @property
    def comm_bytes(self) -> int:
        return nbytes(self.l_comm)

    @property
    def salt_bytes(self) -> int:
        return nbytes(self.l_salt)

    @property
    def nonce_bits(self) -> int:
        return 2 * self.l_seed

    def xof(self, tag: int, payload: bytes, bits: int, ctx: SaltContext | None = None) -> bytes:
        data = bytes([tag]) + payload + _suffix(ctx)
        return truncate_bits(hashlib.shake_256(data).digest(nbytes(bits)), bits)

    def random_seed(self, rng) -> bytes:
        return random_bits(self.l_seed, rng)

    def random_salt(self, rng) -> bytes:
        return random_bits(self.l_salt, rng)

    # commitments

    def commit(self, payload: bytes, ctx: SaltContext | None = None) -> bytes:
        """Deterministic commitment; salted when ``ctx`` is given."""
        return self.xof(TAG_COMMIT, payload, self.l_comm, ctx)

    def commit_randomized(self, payload: bytes, rng) -> tuple[bytes, bytes]:
        rho = random_bits(self.nonce_bits, rng)
        return self.commit(payload + rho), rho

    def open_randomized(self, digest: bytes, payload: bytes, rho: bytes) -> bool:
        if len(rho) != nbytes(self.nonce_bits):
            return False
        return hmac.compare_digest(digest, self.commit(payload + rho))

    def global_commit(self, parts, ctx: SaltContext | None = None) -> bytes:
        return self.xof(TAG_GLOBAL, b"".join(parts), self.l_comm, ctx)

    # seed expansions

    def _split(self, tag: int, seed: bytes, ctx) -> tuple[bytes, bytes]:
        b = self.seed_bytes
        data = hashlib.shake_256(bytes([tag]) + seed + _suffix(ctx)).digest(2 * b)
        return truncate_bits(data[:b], self.l_seed), truncate_bits(data[b:], self.l_seed)

    def expand_seed_pair(self, seed: bytes, ctx: SaltContext | None = None) -> tuple[bytes, bytes]:
        """E0: seed -> (permutation seed, vector seed)."""
        return self._split(TAG_E0, seed, ctx)

    def expand_permutation(self, seed: bytes, n: int, ctx: SaltContext | None = None) -> Permutation:
        """E1: Fisher-Yates over 16-bit little-endian draws with rejection."""
        if n > 1 << 16:
            raise ValueError("n too large for 16-bit draws")
        stream = _Stream(bytes([TAG_E1]) + seed + _suffix(ctx), 3 * n)
        m = list(range(n))
        for i in range(n - 1, 0, -1):
            bound = (65536 // (i + 1)) * (i + 1)
            while True:
                r = int.from_bytes(stream.take(2), "little")
                if r < bound:
                    break
            j = r % (i + 1)
            m[i], m[j] = m[j], m[i]
        return Permutation._wrap(np.array(m, dtype=np.int64))

    def expand_vector(self, seed: bytes, n: int, q: int, ctx: SaltContext | None = None) -> FieldVector:
        """E2: one byte per symbol, bytes >= q * floor(256 / q) rejected."""
        limit = q * (256 // q)
        h = hashlib.shake_256(bytes([TAG_E2]) + seed + _suffix(ctx))
        size = n + n // 4 + 16
        while True:
            raw = np.frombuffer(h.digest(size), dtype=np.uint8)
            ok = raw[raw < limit]
            if len(ok) >= n:
                return FieldVector._wrap(ok[:n].astype(np.int64) % q, q)
            size *= 2

    # trees

    def tree_split(self, seed: bytes, ctx: SaltContext | None = None) -> tuple[bytes, bytes]:
        """J: parent seed -> (left child, right child)."""
        return self._split(TAG_TREE_SEED, seed, ctx)

    def tree_node(self, left: bytes, right: bytes, ctx: SaltContext | None = None) -> bytes:
        """L: hash of two child commitments."""
        return self.xof(TAG_TREE_NODE, left + right, self.l_comm, ctx)

    # Fiat-Shamir

    def challenges(self, xt: bytes, message: bytes, rounds: int) -> list[int]:
        """Trits in {1, 2, 3} from 2-bit chunks of XOF(tag || xt || m), value 3 rejected."""
        stream = _Stream(bytes([TAG_CHALLENGE]) + xt + message, rounds // 2 + 16)
        out: list[int] = []
        while len(out) < rounds:
            byte = stream.take(1)[0]
            for shift in (0, 2, 4, 6):
                v = (byte >> shift) & 3
                if v != 3 and len(out) < rounds:
                    out.append(v + 1)
        return out


# Four-leaf trees.  Nodes are numbered heap-style: 1 is the root, 2 and 3 its
# children, 4..7 the leaves (leaf i sits at node 4 + i).

LEAF_NODES = (4, 5, 6, 7)


def tree_cover(leaves) -> list[int]:
    """Fewest nodes whose subtrees are exactly ``leaves`` (a subset of 0..3)."""
    leaves = set(leaves)
    if leaves == {0, 1, 2, 3}:
        return [1]
    out = []
    for parent, pair in ((2, (0, 1)), (3, (2, 3))):
        if set(pair) <= leaves:
            out.append(parent)
        else:
            out.extend(4 + i for i in pair if i in leaves)
    return out


def node_leaves(node: int) -> tuple[int, ...]:
    if node == 1:
        return (0, 1, 2, 3)
    if node in (2, 3):
        return (2 * node - 4, 2 * node - 3)
    if node in LEAF_NODES:
        return (node - 4,)
    raise ValueError(f"no node {node} in a four-leaf tree")


class SeedTree4:
    """Seed tree of depth two; the J calls use indices base, base+1, base+2."""

    TREE_CALLS = 3

    def __init__(self, suite: HashSuite, root: bytes, ctx: SaltContext | None, base: int):
        self.nodes = {1: root}
        self._expand(suite, 1, ctx, base)
        for k in (2, 3):
            self._expand(suite, k, ctx, base + k - 1)

    def _expand(self, suite, k, ctx, index):
        c = None if ctx is None else ctx.at(index)
        self.nodes[2 * k], self.nodes[2 * k + 1] = suite.tree_split(self.nodes[k], c)

    @property
    def leaves(self) -> list[bytes]:
        return [self.nodes[k] for k in LEAF_NODES]

    def reveal(self, leaves) -> dict[int, bytes]:
        return {k: self.nodes[k] for k in tree_cover(leaves)}

    @staticmethod
    def recover(suite: HashSuite, revealed: dict[int, bytes], ctx: SaltContext | None,
                base: int) -> dict[int, bytes]:
        """Leaf seeds derivable from the revealed nodes, keyed by leaf position.

        Leaves outside every revealed subtree are simply absent.
        """
        nodes = dict(revealed)
        for k in (1, 2, 3):
            if k in nodes:
                c = None if ctx is None else ctx.at(base + k - 1)
                l, r = suite.tree_split(nodes[k], c)
                nodes.setdefault(2 * k, l)
                nodes.setdefault(2 * k + 1, r)
        return {k - 4: nodes[k] for k in LEAF_NODES if k in nodes}


class CommitTree4:
    """Commitment tree over four leaves; the L calls use indices base (node 2),
    base+1 (node 3) and base+2 (root)."""

    TREE_CALLS = 3

    def __init__(self, suite: HashSuite, leaves, ctx: SaltContext | None, base: int):
        self.nodes = {4 + i: x for i, x in enumerate(leaves)}
        _fill(suite, self.nodes, ctx, base)

    @property
    def root(self) -> bytes:
        return self.nodes[1]

    def reveal(self, leaves) -> dict[int, bytes]:
        return {k: self.nodes[k] for k in tree_cover(leaves)}

    @staticmethod
    def recover_root(suite: HashSuite, known: dict[int, bytes], ctx: SaltContext | None,
                     base: int) -> bytes | None:
        """Root from recomputed leaves and revealed inner nodes, all keyed by node id.

        Returns None when some subtree is missing.
        """
        nodes = dict(known)
        _fill(suite, nodes, ctx, base)
        return nodes.get(1)


def _fill(suite, nodes, ctx, base):
    for k, idx in ((2, base), (3, base + 1), (1, base + 2)):
        if k not in nodes and 2 * k in nodes and 2 * k + 1 in nodes:
            c = None if ctx is None else ctx.at(idx)
            nodes[k] = suite.tree_node(nodes[2 * k], nodes[2 * k + 1], c)
