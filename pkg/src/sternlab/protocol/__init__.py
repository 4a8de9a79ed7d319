"""Stern identification schemes: the generic baseline, the seeded variant
without salt, the salt+index variant and the four-round hash-tree variant."""

from .params import DEFAULT_GROUPS, ROUNDS_PER_GROUP, Reject, SchemeParams, Variant, Verdict
from .schemes import (
    GenericScheme,
    ProverState,
    RoundSecrets,
    Scheme,
    SeededScheme,
    TreeScheme,
    global_index,
    round_strings,
    scheme_for,
    simulate_round_strings,
)
from .transcript import (
    GenericOpening,
    SeededOpening,
    SerializationError,
    Transcript,
    TreeOpening,
    decode_transcript,
    encode_transcript,
    pack_trits,
    payload_length,
    unpack_trits,
)


def prover_round1(params: SchemeParams, keypair, rng, **hooks) -> tuple[ProverState, bytes]:
    """Commit phase; returns the prover state and the global commitment."""
    state = scheme_for(params).commit(keypair.public, keypair.secret, rng, **hooks)
    return state, state.xt


def respond(params: SchemeParams, state: ProverState, challenges) -> Transcript:
    return scheme_for(params).respond(state, challenges)


def verify_transcript(params: SchemeParams, pk, transcript: Transcript, **hooks) -> Verdict:
    return scheme_for(params).verify(pk, transcript, **hooks)


def simulate_transcript(params: SchemeParams, pk, rng, challenges=None) -> Transcript:
    return scheme_for(params).simulate(pk, rng, challenges)

from .experiments import (  # noqa: E402
    cross_transcript_matches,
    exact_opening_distributions,
    impersonate,
    seeded_opening_features,
    total_variation,
)

__all__ = [
    "DEFAULT_GROUPS", "ROUNDS_PER_GROUP", "Reject", "SchemeParams", "Variant", "Verdict",
    "GenericScheme", "ProverState", "RoundSecrets", "Scheme", "SeededScheme", "TreeScheme",
    "global_index", "round_strings", "scheme_for", "simulate_round_strings",
    "GenericOpening", "SeededOpening", "SerializationError", "Transcript", "TreeOpening",
    "decode_transcript", "encode_transcript", "pack_trits", "payload_length", "unpack_trits",
    "prover_round1", "respond", "verify_transcript", "simulate_transcript",
    "cross_transcript_matches", "exact_opening_distributions", "impersonate",
    "seeded_opening_features", "total_variation",
]
