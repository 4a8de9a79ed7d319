"""Signatures from the identification schemes, plus key and signature files.

Every file starts with the same header: ``b"STRN"`` followed by 4-byte
little-endian integers (version, object type, variant, n, k, w, q, metric,
rounds, l_seed, l_comm, l_salt).
"""

from __future__ import annotations

import struct

import numpy as np

from .algebra import FieldVector, WeightKind
from .problems import SdInstance, SdKeyPair, sample_sd
from .protocol import (
    SchemeParams,
    SerializationError,
    Transcript,
    Variant,
    Verdict,
    decode_transcript,
    encode_transcript,
    scheme_for,
)

MAGIC = b"STRN"
VERSION = 1
OBJ_PUBLIC, OBJ_SECRET, OBJ_SIGNATURE = 0, 1, 2
_KINDS = [WeightKind.HAMMING, WeightKind.LEE]
_HEADER = struct.Struct("<4s12I")
HEADER_BYTES = _HEADER.size

Signature = Transcript


def keygen(params: SchemeParams, rng) -> SdKeyPair:
    return sample_sd(params.n, params.k, params.w, params.q, params.kind, rng)


def challenge_vector(params: SchemeParams, xt: bytes, message: bytes) -> tuple:
    return tuple(params.suite.challenges(xt, message, params.rounds))


def sign(params: SchemeParams, message: bytes, keypair: SdKeyPair, rng, **hooks) -> Signature:
    scheme = scheme_for(params)
    state = scheme.commit(keypair.public, keypair.secret, rng, **hooks)
    return scheme.respond(state, challenge_vector(params, state.xt, message))


def verify(params: SchemeParams, pk: SdInstance, message: bytes, sig, **hooks) -> Verdict:
    """Accepts a Signature or its encoded bytes (header included)."""
    if isinstance(sig, (bytes, bytearray)):
        try:
            sig_params, sig = decode_signature(bytes(sig))
        except SerializationError as exc:
            return Verdict(False, f"malformed signature: {exc}", malformed=True)
        if sig_params != params:
            return Verdict(False, "signature parameters differ from the key's", malformed=True)
    if len(sig.xt) != params.suite.comm_bytes:
        return Verdict(False, "bad global commitment length", malformed=True)
    if tuple(sig.challenges) != challenge_vector(params, sig.xt, message):
        return Verdict(False, "challenges do not match the message")
    return scheme_for(params).verify(pk, sig, **hooks)


# encoding

def encode_header(params: SchemeParams, obj: int) -> bytes:
    return _HEADER.pack(MAGIC, VERSION, obj, params.variant.wire_tag, params.n, params.k,
                        params.w, params.q, _KINDS.index(params.kind), params.rounds,
                        params.l_seed, params.l_comm, params.l_salt)


def decode_header(data: bytes, obj: int) -> SchemeParams:
    if len(data) < HEADER_BYTES:
        raise SerializationError("truncated header")
    magic, version, got, variant, n, k, w, q, kind, rounds, l_seed, l_comm, l_salt = \
        _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise SerializationError("bad magic")
    if version != VERSION:
        raise SerializationError(f"unsupported version {version}")
    if got != obj:
        raise SerializationError(f"expected object type {obj}, found {got}")
    if variant >= len(Variant) or kind >= len(_KINDS):
        raise SerializationError("unknown variant or metric")
    try:
        return SchemeParams(Variant.from_wire(variant), n, k, w, q, _KINDS[kind], rounds,
                            l_seed, l_comm, l_salt)
    except ValueError as exc:
        raise SerializationError(f"bad parameters: {exc}") from None


def _pk_body(pk: SdInstance) -> bytes:
    return np.asarray(pk.H, dtype=np.uint8).tobytes() + pk.s.to_bytes()


def encode_public_key(params: SchemeParams, pk: SdInstance) -> bytes:
    return encode_header(params, OBJ_PUBLIC) + _pk_body(pk)


def encode_secret_key(params: SchemeParams, keypair: SdKeyPair) -> bytes:
    return encode_header(params, OBJ_SECRET) + _pk_body(keypair.public) + keypair.secret.to_bytes()


def _parse_pk(params: SchemeParams, body: bytes) -> SdInstance:
    n, r, q = params.n, params.n - params.k, params.q
    raw = np.frombuffer(body[:r * n], dtype=np.uint8).astype(np.int64)
    if raw.size and raw.max() >= q:
        raise SerializationError("matrix entry out of range")
    H = raw.reshape(r, n)
    H.flags.writeable = False
    try:
        s = FieldVector.from_bytes(body[r * n:r * n + r], q)
    except ValueError as exc:
        raise SerializationError(str(exc)) from None
    return SdInstance(H, s, params.w, params.kind)


def decode_public_key(data: bytes) -> tuple[SchemeParams, SdInstance]:
    params = decode_header(data, OBJ_PUBLIC)
    body = data[HEADER_BYTES:]
    if len(body) != (params.n - params.k) * (params.n + 1):
        raise SerializationError("public key has the wrong length")
    return params, _parse_pk(params, body)


def decode_secret_key(data: bytes) -> tuple[SchemeParams, SdKeyPair]:
    params = decode_header(data, OBJ_SECRET)
    body = data[HEADER_BYTES:]
    r, n = params.n - params.k, params.n
    if len(body) != r * (n + 1) + n:
        raise SerializationError("secret key has the wrong length")
    pk = _parse_pk(params, body)
    try:
        e = FieldVector.from_bytes(body[r * (n + 1):], params.q)
        return params, SdKeyPair(pk, e)
    except ValueError as exc:
        raise SerializationError(f"inconsistent secret key: {exc}") from None


def encode_signature(params: SchemeParams, sig: Signature) -> bytes:
    return encode_header(params, OBJ_SIGNATURE) + encode_transcript(params, sig)


def decode_signature(data: bytes) -> tuple[SchemeParams, Signature]:
    params = decode_header(data, OBJ_SIGNATURE)
    return params, decode_transcript(params, data[HEADER_BYTES:])
