import dataclasses
import itertools
import random

import pytest

from conftest import ForcedSeedRandom, desk_params, keypair_for
from sternlab.algebra import FieldVector, WeightKind
from sternlab.primitives import SaltContext
from sternlab.protocol import (
    GenericOpening,
    SchemeParams,
    SeededOpening,
    SerializationError,
    TreeOpening,
    Variant,
    cross_transcript_matches,
    decode_transcript,
    encode_transcript,
    exact_opening_distributions,
    global_index,
    impersonate,
    pack_trits,
    prover_round1,
    respond,
    scheme_for,
    seeded_opening_features,
    simulate_transcript,
    total_variation,
    unpack_trits,
    verify_transcript,
)
from sternlab.protocol.schemes import seeded_round
from sternlab.sizemodel import payload_bits

VARIANTS = list(Variant)


def honest(params, kp, rng, challenges, **hooks):
    state, _ = prover_round1(params, kp, rng, **hooks)
    return respond(params, state, challenges)


@pytest.mark.parametrize("variant", VARIANTS)
@pytest.mark.parametrize("q,kind", [(2, WeightKind.HAMMING), (5, WeightKind.LEE), (7, WeightKind.HAMMING)])
def test_completeness_every_challenge_vector(variant, q, kind, rng):
    params = desk_params(variant, q, kind, rounds=4)
    kp = keypair_for(params, rng)
    for cs in itertools.product((1, 2, 3), repeat=4):
        tr = honest(params, kp, rng, cs)
        assert verify_transcript(params, kp.public, tr), cs


@pytest.mark.parametrize("variant", VARIANTS)
def test_serialization_round_trip(variant, rng):
    params = desk_params(variant, 5, WeightKind.LEE, l_seed=12, l_comm=20, l_salt=9)
    kp = keypair_for(params, rng)
    tr = honest(params, kp, rng, [rng.randrange(3) + 1 for _ in range(params.rounds)])
    data = encode_transcript(params, tr)
    back = decode_transcript(params, data)
    assert back == tr
    assert verify_transcript(params, kp.public, back)
    with pytest.raises(SerializationError):
        decode_transcript(params, data[:-1])
    with pytest.raises(SerializationError):
        decode_transcript(params, data + b"\x00")


def test_trit_packing():
    cs = (1, 2, 3, 3, 2)
    assert unpack_trits(pack_trits(cs), 5) == cs
    with pytest.raises(SerializationError):
        unpack_trits(b"\xff\x00", 5)
    with pytest.raises(SerializationError):
        unpack_trits(bytes([0, 0b100]), 5)


@pytest.mark.parametrize("variant", VARIANTS)
def test_every_bit_flip_rejects(variant, rng):
    params = desk_params(variant, rounds=4, l_seed=16)
    kp = keypair_for(params, rng)
    tr = honest(params, kp, rng, (1, 2, 3, 3))
    data = encode_transcript(params, tr)
    step = max(1, len(data) * 8 // 1500)
    for bit in range(0, len(data) * 8, step):
        bad = bytearray(data)
        bad[bit // 8] ^= 1 << (bit % 8)
        try:
            forged = decode_transcript(params, bytes(bad))
        except SerializationError:
            continue
        assert not verify_transcript(params, kp.public, forged), bit


@pytest.mark.parametrize("variant", VARIANTS)
def test_changed_challenge_rejects(variant, rng):
    params = desk_params(variant, rounds=4)
    kp = keypair_for(params, rng)
    tr = honest(params, kp, rng, (1, 2, 3, 1))
    for j in range(4):
        cs = list(tr.challenges)
        cs[j] = cs[j] % 3 + 1
        assert not verify_transcript(params, kp.public, dataclasses.replace(tr, challenges=tuple(cs)))


@pytest.mark.parametrize("variant", [Variant.SALTED, Variant.TREE])
def test_changed_salt_rejects(variant, rng):
    params = desk_params(variant, rounds=4)
    kp = keypair_for(params, rng)
    tr = honest(params, kp, rng, (3, 3, 3, 3))
    salt = bytes([tr.salt[0] ^ 1]) + tr.salt[1:]
    assert not verify_transcript(params, kp.public, dataclasses.replace(tr, salt=salt))


def test_wrong_weight_vector_rejects(rng):
    params = desk_params(Variant.SALTED, rounds=1)
    kp = keypair_for(params, rng)
    tr = honest(params, kp, rng, (1,))
    op = tr.openings[0]
    heavier = FieldVector([1] * params.n, 2)
    forged = dataclasses.replace(tr, openings=(dataclasses.replace(op, vector=heavier),))
    v = verify_transcript(params, kp.public, forged)
    assert not v and "weight" in v.reason


def test_malformed_openings_reject_with_reason(rng):
    params = desk_params(Variant.SALTED, rounds=2)
    kp = keypair_for(params, rng)
    tr = honest(params, kp, rng, (3, 1))
    short = dataclasses.replace(tr.openings[0], seed=b"\x00")
    v = verify_transcript(params, kp.public, dataclasses.replace(tr, openings=(short, tr.openings[1])))
    assert not v and v.malformed
    v = verify_transcript(params, kp.public, dataclasses.replace(tr, challenges=(3,)))
    assert not v and v.malformed
    tparams = desk_params(Variant.TREE, rounds=4)
    ttr = honest(tparams, keypair_for(tparams, rng), rng, (1, 1, 1, 1))
    op = ttr.openings[0]
    v = verify_transcript(tparams, kp.public, dataclasses.replace(
        ttr, openings=(dataclasses.replace(op, third=(b"\x00" * 32,)),)))
    assert not v and v.malformed


def record_indices(monkeypatch):
    used = []
    original = SaltContext.suffix

    def spy(self):
        used.append(self.index)
        return original(self)

    monkeypatch.setattr(SaltContext, "suffix", spy)
    return used


def test_salted_index_schedule(monkeypatch, rng):
    params = desk_params(Variant.SALTED, rounds=5)
    kp = keypair_for(params, rng)
    used = record_indices(monkeypatch)
    state, _ = prover_round1(params, kp, rng)
    assert sorted(used) == list(range(6 * params.rounds + 1))
    assert params.index_count == 6 * params.rounds + 1 == global_index(params) + 1
    tr = respond(params, state, (1, 2, 3, 1, 2))
    used.clear()
    assert verify_transcript(params, kp.public, tr)
    assert len(used) == len(set(used)) and max(used) == 6 * params.rounds


def test_tree_index_schedule(monkeypatch, rng):
    params = desk_params(Variant.TREE, rounds=8)
    kp = keypair_for(params, rng)
    used = record_indices(monkeypatch)
    prover_round1(params, kp, rng)
    expect = set(range(params.index_count)) - {6 * j for j in range(params.rounds)}
    assert sorted(used) == sorted(expect)
    assert params.index_count == 6 * 8 + 15 * 2 + 1


def test_unsalted_variants_never_index(monkeypatch, rng):
    used = record_indices(monkeypatch)
    for variant in (Variant.GENERIC, Variant.VULNERABLE):
        params = desk_params(variant, rounds=3)
        kp = keypair_for(params, rng)
        assert verify_transcript(params, kp.public, honest(params, kp, rng, (1, 2, 3)))
        assert params.index_count == 0
    assert used == []


def test_tree_rounds_match_salted_round_construction(rng):
    params = desk_params(Variant.TREE, rounds=4)
    kp = keypair_for(params, rng)
    state, _ = prover_round1(params, kp, rng)
    ctx = SaltContext(state.salt)
    perm_tree, vec_tree, _ = state.trees[0]
    for j, r in enumerate(state.rounds):
        again = seeded_round(params, kp.public, kp.secret, j, ctx,
                             perm_tree.leaves[j], vec_tree.leaves[j])
        assert again.commitments == r.commitments


def test_vulnerable_rounds_repeat_with_repeated_seeds():
    params = desk_params(Variant.VULNERABLE, rounds=3, l_seed=16)
    kp = keypair_for(params, random.Random(0))
    a = prover_round1(params, kp, ForcedSeedRandom(1, 2))[0]
    b = prover_round1(params, kp, ForcedSeedRandom(2, 2))[0]
    assert a.rounds[0].commitments == b.rounds[1].commitments


def test_salted_rounds_differ_with_repeated_seeds():
    params = desk_params(Variant.SALTED, rounds=3, l_seed=16)
    kp = keypair_for(params, random.Random(0))
    st = prover_round1(params, kp, ForcedSeedRandom(1, 2), salt=bytes(32))[0]
    xs = {x for r in st.rounds for x in r.commitments}
    assert len(xs) == 9


def test_frozen_index_brings_back_repeats():
    params = desk_params(Variant.SALTED, rounds=3, l_seed=16)
    kp = keypair_for(params, random.Random(0))
    st = prover_round1(params, kp, ForcedSeedRandom(1, 2), salt=bytes(32), freeze_index=True)[0]
    assert st.rounds[0].commitments == st.rounds[2].commitments
    tr = respond(params, st, (1, 2, 3))
    assert verify_transcript(params, kp.public, tr, freeze_index=True)
    assert not verify_transcript(params, kp.public, tr)


@pytest.mark.parametrize("variant", VARIANTS)
def test_simulated_transcripts_verify(variant, rng):
    params = desk_params(variant, 3, WeightKind.LEE, rounds=8)
    kp = keypair_for(params, rng)
    for _ in range(5):
        tr = simulate_transcript(params, kp.public, rng)
        assert verify_transcript(params, kp.public, tr)
    tr = simulate_transcript(params, kp.public, rng, challenges=[3] * 8)
    assert tr.challenges == (3,) * 8


@pytest.mark.parametrize("variant", VARIANTS)
def test_simulated_sizes_match_honest(variant, rng):
    params = desk_params(variant, rounds=8)
    kp = keypair_for(params, rng)
    cs = [rng.randrange(3) + 1 for _ in range(8)]
    real = encode_transcript(params, honest(params, kp, rng, cs))
    fake = encode_transcript(params, simulate_transcript(params, kp.public, rng, cs))
    assert len(real) == len(fake)


def test_opening_kinds():
    assert SeededOpening(b"", b"").vector is None
    assert GenericOpening(b"", (), ()).strings == ()
    assert TreeOpening((), (), (), (), (), ()).third == ()


def test_respond_rejects_bad_challenges(rng):
    params = desk_params(Variant.SALTED, rounds=2)
    state, _ = prover_round1(params, keypair_for(params, rng), rng)
    with pytest.raises(ValueError):
        respond(params, state, (1,))
    with pytest.raises(ValueError):
        respond(params, state, (1, 4))


def test_params_validation():
    with pytest.raises(ValueError):
        SchemeParams(Variant.TREE, 24, 12, 6, 2, rounds=6)
    with pytest.raises(ValueError):
        SchemeParams(Variant.SALTED, 24, 12, 30, 2)
    with pytest.raises(ValueError):
        SchemeParams(Variant.SALTED, 300, 150, 6, 2)
    assert SchemeParams(Variant.SALTED, 24, 12, 6, 2).rounds == 203
    assert SchemeParams(Variant.TREE, 24, 12, 6, 2).rounds == 220
    assert SchemeParams(Variant.VULNERABLE, 24, 12, 6, 2).salt_bits == 0
    p = SchemeParams(Variant.SALTED, 24, 12, 6, 2, rounds=4)
    assert p.replace(rounds=8).rounds == 8


def test_exact_zero_knowledge_tiny():
    from sternlab.problems import sample_sd

    kp = sample_sd(4, 2, 2, 2, WeightKind.HAMMING, random.Random(9))
    real, sim = exact_opening_distributions(kp.public, kp.secret)
    assert total_variation(real, sim) == 0
    assert sum(real.values()) == sum(sim.values()) == 1


def test_seeded_features_close(rng):
    params = SchemeParams(Variant.SALTED, 8, 4, 3, 2, rounds=1, l_seed=128)
    kp = keypair_for(params, rng)
    real = seeded_opening_features(params, kp.public, kp.secret, rng, 4000, False)
    sim = seeded_opening_features(params, kp.public, kp.secret, rng, 4000, True)
    for c in (1, 2, 3):
        assert total_variation(real[c], sim[c]) < 0.05


def test_cross_transcript_matches(rng):
    kwargs = dict(rounds=8, l_seed=10)
    vul = desk_params(Variant.VULNERABLE, **kwargs)
    kp = keypair_for(vul, rng)
    trs = [honest(vul, kp, rng, [rng.randrange(3) + 1 for _ in range(8)]) for _ in range(200)]
    assert cross_transcript_matches(vul, kp.public, trs) > 0
    sal = desk_params(Variant.SALTED, **kwargs)
    trs = [honest(sal, kp, rng, [rng.randrange(3) + 1 for _ in range(8)]) for _ in range(200)]
    assert cross_transcript_matches(sal, kp.public, trs) == 0
    sims = [simulate_transcript(vul, kp.public, rng) for _ in range(200)]
    assert cross_transcript_matches(vul, kp.public, sims) == 0


@pytest.mark.parametrize("variant", [Variant.GENERIC, Variant.SALTED])
def test_impersonator_wins_about_two_thirds(variant):
    rng = random.Random(21)
    params = desk_params(variant, rounds=1)
    kp = keypair_for(params, rng)
    wins = sum(bool(impersonate(params, kp.public, rng)) for _ in range(1500))
    assert 0.6 < wins / 1500 < 0.73


def test_impersonation_refuses_tree(rng):
    params = desk_params(Variant.TREE, rounds=4)
    with pytest.raises(ValueError):
        impersonate(params, keypair_for(params, rng).public, rng)


def test_payload_bits_positive(rng):
    params = desk_params(Variant.TREE, rounds=4)
    tr = honest(params, keypair_for(params, rng), rng, (1, 2, 3, 3))
    assert payload_bits(params, tr) > params.l_salt + params.l_comm


def test_scheme_dispatch():
    assert type(scheme_for(desk_params(Variant.VULNERABLE))).__name__ == "SeededScheme"
