"""Transcript records and their canonical byte encoding.

Layout: ``xt || salt || packed challenges || payload*`` where each payload is
prefixed by its 4-byte little-endian length.  Challenges 1, 2, 3 travel as the
2-bit values 0, 1, 2, four per byte, low bits first.  There is one payload per
round, or one per group of four rounds for the tree variant.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Optional, Union

from ..algebra import FieldVector
from ..primitives import nbytes, tree_cover
from .params import ROUNDS_PER_GROUP, SchemeParams, Variant


class SerializationError(ValueError):
    pass


@dataclass(frozen=True)
class SeededOpening:
    """Hidden commitment, one seed (vector seed, permutation seed or round
    seed for challenges 1, 2, 3) and the vector ``pi(e)`` or ``y + e``."""

    commitment: bytes
    seed: bytes
    vector: Optional[FieldVector] = None


@dataclass(frozen=True)
class GenericOpening:
    """Hidden commitment plus the two opened strings and their nonces, in
    increasing string order."""

    commitment: bytes
    strings: tuple
    nonces: tuple


@dataclass(frozen=True)
class TreeOpening:
    """One group of four rounds.

    Node tuples follow ``tree_cover`` order for the leaves that need them:
    permutation seeds for challenges 2 and 3, vector seeds for 1 and 3,
    first commitments for 1, second for 2, and third commitments (leaf by
    leaf) for 3.
    """

    perm_seeds: tuple
    vec_seeds: tuple
    first: tuple
    second: tuple
    third: tuple
    vectors: tuple


Opening = Union[SeededOpening, GenericOpening, TreeOpening]


@dataclass(frozen=True)
class Transcript:
    variant: Variant
    xt: bytes
    salt: bytes
    challenges: tuple
    openings: tuple


def pack_trits(challenges) -> bytes:
    out = bytearray(nbytes(2 * len(challenges)))
    for i, c in enumerate(challenges):
        if c not in (1, 2, 3):
            raise ValueError(f"challenge {c} outside {{1, 2, 3}}")
        out[i // 4] |= (c - 1) << (2 * (i % 4))
    return bytes(out)


def unpack_trits(data: bytes, count: int) -> tuple:
    if len(data) != nbytes(2 * count):
        raise SerializationError("challenge block has the wrong length")
    out = []
    for i in range(count):
        v = (data[i // 4] >> (2 * (i % 4))) & 3
        if v == 3:
            raise SerializationError("challenge value 3 on the wire")
        out.append(v + 1)
    if count % 4 and data[-1] >> (2 * (count % 4)):
        raise SerializationError("nonzero padding after the challenges")
    return tuple(out)


def group_leaves(challenges) -> dict:
    """Leaf positions (0..3) per reveal class for one group of challenges."""
    cs = list(challenges)
    return {
        "perm_seeds": [i for i, c in enumerate(cs) if c in (2, 3)],
        "vec_seeds": [i for i, c in enumerate(cs) if c in (1, 3)],
        "first": [i for i, c in enumerate(cs) if c == 1],
        "second": [i for i, c in enumerate(cs) if c == 2],
        "third": [i for i, c in enumerate(cs) if c == 3],
    }


def opening_sizes(params: SchemeParams, challenge) -> list[int]:
    """Byte length of each field of one payload, in wire order."""
    n, r = params.n, params.n - params.k
    cb, sb = nbytes(params.l_comm), nbytes(params.l_seed)
    if params.variant is Variant.GENERIC:
        z = {1: n + r, 2: n, 3: n}
        a, b = [i for i in (1, 2, 3) if i != challenge]
        rho = nbytes(2 * params.l_seed)
        return [cb, z[a], z[b], rho, rho]
    if params.variant is Variant.TREE:
        g = group_leaves(challenge)
        sizes = [sb] * len(tree_cover(g["perm_seeds"])) + [sb] * len(tree_cover(g["vec_seeds"]))
        sizes += [cb] * (len(tree_cover(g["first"])) + len(tree_cover(g["second"])) + len(g["third"]))
        sizes += [n] * sum(1 for c in challenge if c != 3)
        return sizes
    return [cb, sb] + ([n] if challenge != 3 else [])


def payload_length(params: SchemeParams, challenge) -> int:
    return sum(opening_sizes(params, challenge))


def _encode_opening(params: SchemeParams, op) -> bytes:
    if isinstance(op, SeededOpening):
        return op.commitment + op.seed + (op.vector.to_bytes() if op.vector is not None else b"")
    if isinstance(op, GenericOpening):
        return op.commitment + b"".join(op.strings) + b"".join(op.nonces)
    parts = [*op.perm_seeds, *op.vec_seeds, *op.first, *op.second, *op.third]
    parts += [v.to_bytes() for v in op.vectors if v is not None]
    return b"".join(parts)


def _split(data: bytes, sizes) -> list[bytes]:
    out, pos = [], 0
    for s in sizes:
        out.append(data[pos:pos + s])
        pos += s
    return out


def _vector(raw: bytes, q: int) -> FieldVector:
    try:
        return FieldVector.from_bytes(raw, q)
    except ValueError as exc:
        raise SerializationError(str(exc)) from None


def _decode_opening(params: SchemeParams, challenge, data: bytes):
    sizes = opening_sizes(params, challenge)
    if len(data) != sum(sizes):
        raise SerializationError("payload has the wrong length")
    f = _split(data, sizes)
    if params.variant is Variant.GENERIC:
        return GenericOpening(f[0], (f[1], f[2]), (f[3], f[4]))
    if params.variant is Variant.TREE:
        g = group_leaves(challenge)
        counts = [len(tree_cover(g["perm_seeds"])), len(tree_cover(g["vec_seeds"])),
                  len(tree_cover(g["first"])), len(tree_cover(g["second"])), len(g["third"])]
        groups, pos = [], 0
        for cnt in counts:
            groups.append(tuple(f[pos:pos + cnt]))
            pos += cnt
        vecs = iter(f[pos:])
        vectors = tuple(_vector(next(vecs), params.q) if c != 3 else None for c in challenge)
        return TreeOpening(*groups, vectors)
    vec = _vector(f[2], params.q) if challenge != 3 else None
    return SeededOpening(f[0], f[1], vec)


def payload_units(params: SchemeParams, challenges) -> list:
    """Challenge (or group of four challenges) governing each payload."""
    if params.variant is Variant.TREE:
        return [tuple(challenges[i:i + ROUNDS_PER_GROUP])
                for i in range(0, len(challenges), ROUNDS_PER_GROUP)]
    return list(challenges)


def encode_transcript(params: SchemeParams, tr: Transcript) -> bytes:
    out = [tr.xt, tr.salt, pack_trits(tr.challenges)]
    for op in tr.openings:
        body = _encode_opening(params, op)
        out.append(struct.pack("<I", len(body)) + body)
    return b"".join(out)


def decode_transcript(params: SchemeParams, data: bytes) -> Transcript:
    cb, sb = nbytes(params.l_comm), nbytes(params.salt_bits)
    tb = nbytes(2 * params.rounds)
    if len(data) < cb + sb + tb:
        raise SerializationError("transcript truncated before the payloads")
    xt, salt = data[:cb], data[cb:cb + sb]
    challenges = unpack_trits(data[cb + sb:cb + sb + tb], params.rounds)
    pos = cb + sb + tb
    openings = []
    for unit in payload_units(params, challenges):
        if pos + 4 > len(data):
            raise SerializationError("transcript truncated inside the payloads")
        (length,) = struct.unpack_from("<I", data, pos)
        pos += 4
        if pos + length > len(data):
            raise SerializationError("payload runs past the end of the transcript")
        openings.append(_decode_opening(params, unit, data[pos:pos + length]))
        pos += length
    if pos != len(data):
        raise SerializationError("trailing bytes after the last payload")
    return Transcript(params.variant, xt, salt, challenges, tuple(openings))


FRAMING_BYTES_PER_PAYLOAD = 4
