"""Acceptance criteria 1-8, each at its stated size and tolerance.

Every test prints one ``PASS``/``FAIL`` line (shown even under output
capture).  Run on its own with ``python tests/test_acceptance.py``.
"""

import math
import random
import statistics
import time
from collections import Counter
from fractions import Fraction

import pytest
from scipy.stats import chisquare

from sternlab.algebra import WeightKind
from sternlab.attack import AttackConfig, attack_params, run_attack, run_negative_control, signing_oracle
from sternlab.fiatshamir import keygen, sign, verify
from sternlab.primitives import HashSuite, SaltContext
from sternlab.problems import brute_force_pkp, pull_back, reduce_sd_to_pkp, reduction_success_bound, sample_sd
from sternlab.protocol import (
    SchemeParams,
    Variant,
    exact_opening_distributions,
    impersonate,
    seeded_opening_features,
    total_variation,
)
from sternlab.sizemodel import (
    C1_COMM,
    C1_SEED,
    PRESET_CELLS,
    TABLE_QS,
    VERSIONS,
    CostModel,
    c1_bits,
    c1_by_enumeration,
    cost_flat,
    payload_bits,
    table_cells,
)


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
        assert ok, detail
    return emit


def small_rounds(variant):
    # the tree variant fuses rounds four at a time, so 10 becomes 12
    return 12 if variant is Variant.TREE else 10


def test_criterion_1_completeness(report):
    rng = random.Random(101)
    variants = list(Variant)
    cycles, accepted, large = 10_000, 0, 0
    start = time.perf_counter()
    for i in range(cycles):
        variant = variants[i % 4]
        q = (2, 3, 5)[(i // 4) % 3]
        kind = WeightKind.LEE if (i // 12) % 2 else WeightKind.HAMMING
        rounds = 220 if i % 25 == 0 else small_rounds(variant)
        large += rounds == 220
        params = SchemeParams(variant, 24, 12, 6, q, kind, rounds=rounds)
        kp = keygen(params, rng)
        message = rng.randbytes(rng.randrange(0, 64))
        accepted += bool(verify(params, kp.public, message, sign(params, message, kp, rng)))
    elapsed = time.perf_counter() - start
    report(1, accepted == cycles and elapsed < 120,
           f"{accepted}/{cycles} accepted ({large} at R=220) in {elapsed:.1f}s (limit 120s)")


def attack_run(cfg, seed, salted=False, budget_factor=None, **hooks):
    rng = random.Random(seed)
    params = attack_params(cfg, salted=salted)
    kp = keygen(params, rng)
    oracle = signing_oracle(params, kp, rng, **hooks)
    if budget_factor is None:
        out = run_attack(cfg, oracle, kp.public, params)
    else:
        out = run_negative_control(cfg, oracle, kp.public, params, budget_factor,
                                   freeze_index=hooks.get("freeze_index", False))
    return kp, out


def test_criterion_2_attack(report):
    cfg = AttackConfig(l_seed=16, rounds=10, max_iterations=50)
    wins, slowest, valid = 0, 0.0, True
    for seed in range(10):
        kp, out = attack_run(cfg, 200 + seed)
        slowest = max(slowest, out.wall_time)
        if out.recovered:
            wins += out.signatures_used <= 50 * cfg.q_s
            valid &= kp.public.is_solution(out.recovered_e)
    means = {}
    for l in (12, 14, 16, 18):
        c = AttackConfig(l_seed=l, rounds=10, max_iterations=50)
        used = []
        for seed in range(50):
            _, out = attack_run(c, 1000 * l + seed)
            if out.recovered:
                used.append(out.signatures_used)
        means[l] = statistics.mean(used) if used else math.inf
    ratios = [means[b] / means[a] for a, b in ((12, 14), (14, 16), (16, 18))]
    trend = all(1.3 < r < 3.2 for r in ratios)
    trend_text = ", ".join(f"l={l}: {m:.1f}" for l, m in means.items())
    report(2, wins >= 8 and slowest < 30 and valid and trend,
           f"{wins}/10 recoveries within {50 * cfg.q_s} signatures, slowest {slowest:.2f}s; "
           f"mean signatures to success {trend_text}; step ratios "
           + ", ".join(f"{r:.2f}" for r in ratios))


def test_criterion_3_salted_control(report):
    cfg = AttackConfig(l_seed=16, rounds=10)
    pairs = equalities = recoveries = signatures = 0
    for seed in range(10):
        _, out = attack_run(cfg, 300 + seed, salted=True, budget_factor=100)
        pairs += out.condition_pairs
        equalities += out.x2_collisions
        recoveries += out.recovered
        signatures += out.signatures_used
    kp, hooked = attack_run(cfg, 399, salted=True, budget_factor=100,
                            salt=bytes(32), freeze_index=True)
    restored = hooked.condition_pairs > 0 and hooked.recovered_e == kp.secret
    report(3, pairs == 0 and equalities == 0 and recoveries == 0 and restored,
           f"salted: {equalities} x2 equalities, {pairs} condition pairs, {recoveries} recoveries "
           f"over {signatures} signatures "
           f"in 10 runs; fixed salt + frozen index: {hooked.condition_pairs} condition pairs, "
           f"key recovered {hooked.recovered}")


def test_criterion_4_zero_knowledge(report):
    rng = random.Random(401)
    kp = sample_sd(4, 2, 2, 2, WeightKind.HAMMING, rng)
    real, sim = exact_opening_distributions(kp.public, kp.secret)
    exact_tv = total_variation(real, sim)
    worst = 0.0
    for variant in (Variant.VULNERABLE, Variant.SALTED):
        params = SchemeParams(variant, 8, 4, 3, 2, rounds=1)
        kp8 = keygen(params, rng)
        honest = seeded_opening_features(params, kp8.public, kp8.secret, rng, 100_000, False)
        simulated = seeded_opening_features(params, kp8.public, kp8.secret, rng, 100_000, True)
        worst = max(worst, *(total_variation(honest[c], simulated[c]) for c in (1, 2, 3)))
    report(4, exact_tv == Fraction(0) and worst < 0.01,
           f"exact TV at n=4 = {exact_tv}; worst seeded per-challenge TV at n=8 = {worst:.4f} (< 0.01)")


def test_criterion_5_impersonator(report):
    rng = random.Random(501)
    rates = {}
    for variant in (Variant.GENERIC, Variant.SALTED):
        params = SchemeParams(variant, 24, 12, 6, 2, rounds=1)
        kp = keygen(params, rng)
        wins = sum(bool(impersonate(params, kp.public, rng)) for _ in range(10_000))
        rates[variant.value] = wins / 10_000
    ok = all(0.646 <= r <= 0.686 for r in rates.values())
    report(5, ok, "single-round win rate " + ", ".join(f"{v} {r:.4f}" for v, r in rates.items())
           + " (band [0.646, 0.686])")


def test_criterion_6_reduction(report):
    rng = random.Random(601)
    trials, solved, pulled = 2000, 0, 0
    for _ in range(trials):
        kp = sample_sd(8, 4, 3, 3, WeightKind.HAMMING, rng)
        pkp = reduce_sd_to_pkp(kp.public)
        sigma = brute_force_pkp(pkp)
        if sigma is not None:
            solved += 1
            pulled += kp.public.is_solution(pull_back(pkp, sigma))
    p = reduction_success_bound(8, 3)
    floor = p - 3 * math.sqrt(p * (1 - p) / trials)
    rate = solved / trials
    report(6, rate >= floor and pulled == solved,
           f"PKP solved {solved}/{trials} = {rate:.4f} (floor {floor:.4f} from 1/45); "
           f"pull-backs valid {pulled}/{solved}")


def test_criterion_7_sizes(report):
    identity = all(c1_by_enumeration(t) == (C1_SEED, C1_COMM) for t in (1, 2))
    identity &= c1_bits(128, 256) == Fraction(128, 81) * 128 + Fraction(89, 81) * 256
    rng = random.Random(701)
    worst = 0.0
    for variant in Variant:
        params = SchemeParams(variant, 24, 12, 6, 5, WeightKind.LEE, rounds=12)
        kp = keygen(params, rng)
        mean = statistics.fmean(payload_bits(params, sign(params, b"%d" % i, kp, rng))
                                for i in range(10_000))
        analytic = cost_flat(variant, CostModel.from_params(params))
        worst = max(worst, abs(mean - analytic) / analytic)
    structure = True
    for version in VERSIONS:
        rows = table_cells(PRESET_CELLS, version)
        structure &= [(r["metric"], r["q"]) for r in rows] == \
            [(m, q) for m in ("hamming", "lee") for q in TABLE_QS]
        bits = {(r["metric"], r["q"]): r["bits"] for r in rows}
        structure &= all(bits[("hamming", q)] == bits[("lee", q)] for q in (2, 3))
        if version != "non-optimized":
            structure &= all(bits[("lee", q)] <= bits[("hamming", q)] for q in (5, 7, 13))
    report(7, identity and worst < 0.01 and structure,
           f"C1 = 128/81 l_seed + 89/81 l_comm exact: {identity}; worst Monte Carlo deviation "
           f"{100 * worst:.3f}% (< 1%); table structure holds: {structure}")


def test_criterion_8_primitives(report):
    suite = HashSuite(128, 256, 256)
    rng = random.Random(801)
    perms = Counter(tuple(suite.expand_permutation(rng.randbytes(16), 3).tolist())
                    for _ in range(100_000))
    symbols = Counter(int(suite.expand_vector(rng.randbytes(16), 1, 5)[0]) for _ in range(100_000))
    p_perm = chisquare(list(perms.values())).pvalue if len(perms) == 6 else 0.0
    p_vec = chisquare([symbols[a] for a in range(5)]).pvalue
    digests = set()
    for sig in range(100):
        salt = suite.random_salt(rng)
        for index in range(1000):
            digests.add(suite.commit(b"fixed payload", SaltContext(salt, index)))
    collisions = 100_000 - len(digests)
    report(8, p_perm > 0.001 and p_vec > 0.001 and collisions == 0,
           f"E1 over Perm3 p={p_perm:.3f}, E2 over F5 p={p_vec:.3f}; "
           f"{collisions} collisions among 100000 salted commitments")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
