"""Distribution experiments: zero-knowledge checks, multi-transcript
commitment matching and the challenge-guessing impersonator."""

from __future__ import annotations

import itertools
from collections import Counter
from fractions import Fraction

from ..algebra import (
    FieldVector,
    Permutation,
    apply_permutation,
    iter_sphere,
    mat_vec,
    random_vector,
    sample_sphere,
    solve_linear,
    weight,
)
from ..primitives import SaltContext
from ..problems import SdInstance
from .params import SchemeParams, Variant, Verdict
from .schemes import round_strings, scheme_for, simulate_round_strings


def total_variation(p: dict, q: dict):
    keys = set(p) | set(q)
    return sum(abs(p.get(k, 0) - q.get(k, 0)) for k in keys) / 2


def _all_vectors(n, q):
    for t in itertools.product(range(q), repeat=n):
        yield FieldVector(t, q)


def exact_opening_distributions(pk: SdInstance, secret: FieldVector) -> tuple[dict, dict]:
    """Exact laws of (challenge, opened strings) for honest and simulated rounds.

    Enumerates every permutation and vector, so only tiny n and q are sensible.
    """
    n, q = pk.n, pk.q
    perms = [Permutation(p) for p in itertools.permutations(range(n))]
    vectors = list(_all_vectors(n, q))
    sphere = list(iter_sphere(n, q, pk.w, pk.kind))
    real: Counter = Counter()
    for perm in perms:
        for y in vectors:
            z = round_strings(pk, secret, perm, y)
            for c in (1, 2, 3):
                real[(c,) + tuple(z[i] for i in (1, 2, 3) if i != c)] += 1
    real_total = 3 * len(perms) * len(vectors)
    sim = {}
    for c in (1, 2, 3):
        counts: Counter = Counter()
        if c == 1:
            for v in vectors:
                for err in sphere:
                    z = simulate_round_strings(pk, 1, perms[0], v, err)
                    counts[(1, z[2], z[3])] += 1
        else:
            for perm in perms:
                for v in vectors:
                    z = simulate_round_strings(pk, c, perm, v, sphere[0])
                    counts[(c,) + tuple(z[i] for i in (1, 2, 3) if i != c)] += 1
        total = 3 * sum(counts.values())
        sim.update({k: Fraction(m, total) for k, m in counts.items()})
    return {k: Fraction(m, real_total) for k, m in real.items()}, sim


def _features(c, perm, t, z2, z3):
    """Small projection of the strings opened for challenge ``c``."""
    if c == 1:
        return (int(z2[0]), int(z3[0]))
    if c == 2:
        return (int(t[0]), int(z3[0]))
    return (int(t[0]), int(z2[0]))


def seeded_opening_features(params: SchemeParams, pk: SdInstance, secret: FieldVector, rng,
                            samples: int, simulated: bool) -> dict:
    """Empirical feature laws, per challenge, of one seeded round.

    Honest rounds are expanded from seeds exactly as the prover does (the
    commitments are skipped since the features never look at them); one
    honest round serves all three challenges.  Simulated rounds follow the
    simulator case by case.
    """
    s, n, q = params.suite, params.n, params.q
    out = {c: Counter() for c in (1, 2, 3)}

    def ctx():
        return SaltContext(s.random_salt(rng)) if params.variant.salted else None

    def at(c, i):
        return None if c is None else c.at(i)

    for _ in range(samples):
        if not simulated:
            c0 = ctx()
            sp, sy = s.expand_seed_pair(s.random_seed(rng), at(c0, 0))
            perm = s.expand_permutation(sp, n, at(c0, 1))
            z2 = s.expand_vector(sy, n, q, at(c0, 2))
            y = apply_permutation(perm.inverse(), z2)
            t = mat_vec(pk.H, y)
            z3 = z2 + apply_permutation(perm, secret)
            for c in (1, 2, 3):
                out[c][_features(c, perm, t, z2, z3)] += 1
            continue
        c1, c2, c3 = ctx(), ctx(), ctx()
        z2 = s.expand_vector(s.random_seed(rng), n, q, at(c1, 2))
        z3 = z2 + sample_sphere(n, params.q, params.w, params.kind, rng)
        out[1][_features(1, None, None, z2, z3)] += 1
        perm = s.expand_permutation(s.random_seed(rng), n, at(c2, 1))
        u = random_vector(n, q, rng)
        out[2][_features(2, perm, mat_vec(pk.H, u) - pk.s, None, apply_permutation(perm, u))] += 1
        sp, sy = s.expand_seed_pair(s.random_seed(rng), at(c3, 0))
        perm = s.expand_permutation(sp, n, at(c3, 1))
        z2 = s.expand_vector(sy, n, q, at(c3, 2))
        t = mat_vec(pk.H, apply_permutation(perm.inverse(), z2))
        out[3][_features(3, perm, t, z2, None)] += 1
    return {c: {k: v / samples for k, v in cnt.items()} for c, cnt in out.items()}


def cross_transcript_matches(params: SchemeParams, pk: SdInstance, transcripts) -> int:
    """How many carried (unopened) commitments equal a commitment that some
    other transcript lets the verifier recompute."""
    scheme = scheme_for(params)
    recomputed: dict[bytes, set] = {}
    hidden = []
    for k, tr in enumerate(transcripts):
        parts = scheme.recover(pk, tr)
        for j, c in enumerate(tr.challenges):
            for i in range(3):
                x = parts[3 * j + i]
                if i == c - 1:
                    hidden.append((k, x))
                else:
                    recomputed.setdefault(x, set()).add(k)
    return sum(1 for k, x in hidden if recomputed.get(x, set()) - {k})


def _wrong_weight_preimage(pk: SdInstance, params: SchemeParams, rng) -> FieldVector:
    """Random solution of H e = s whose weight is not w.

    A weight-w solution would be a genuine secret, not a stand-in.
    """
    while True:
        r = random_vector(params.n, params.q, rng)
        d = solve_linear(pk.H, pk.s - mat_vec(pk.H, r))
        if d is None:
            raise ValueError("syndrome outside the column space of H")
        e = r + d
        if weight(e, params.kind) != params.w:
            return e


def impersonator_fakes(pk: SdInstance, params: SchemeParams, rng) -> list:
    """Per round, a stand-in secret and syndrome offset that answer two of the
    three challenges; the excluded challenge is chosen uniformly."""
    fakes = []
    for _ in range(params.rounds):
        excluded = rng.randrange(3) + 1
        if excluded == 1:
            fakes.append((_wrong_weight_preimage(pk, params, rng), None))
        else:
            e = sample_sphere(params.n, params.q, params.w, params.kind, rng)
            offset = mat_vec(pk.H, e) - pk.s if excluded == 3 else None
            fakes.append((e, offset))
    return fakes


def impersonate(params: SchemeParams, pk: SdInstance, rng) -> Verdict:
    """One interactive run of a keyless prover against an honest verifier."""
    if params.variant is Variant.TREE:
        raise ValueError("impersonation is run on the per-round variants")
    scheme = scheme_for(params)
    zero = FieldVector.zeros(params.n, params.q)
    state = scheme.commit(pk, zero, rng, fakes=impersonator_fakes(pk, params, rng))
    challenges = [rng.randrange(3) + 1 for _ in range(params.rounds)]
    return scheme.verify(pk, scheme.respond(state, challenges))
