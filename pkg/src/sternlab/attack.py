"""Seed-collision key recovery against the unsalted seeded scheme.

Every observed round contributes its second commitment ``x2`` to a digest
index: carried in the signature when the challenge was 2, recomputed from the
revealed vector seed otherwise.  Two rounds with equal ``x2``, one answered
with challenge 2 and the other not, almost always share the vector seed, and
then ``e = y_e - pi^-1(E2(seed_y))`` where ``y_e`` is the opened ``y + e``.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass
from typing import Callable, Optional

from .algebra import FieldVector, apply_permutation
from .fiatshamir import Signature, sign
from .primitives import SaltContext
from .problems import SdInstance, SdKeyPair
from .protocol import SchemeParams, Variant

Oracle = Callable[[bytes], Signature]


@dataclass(frozen=True)
class AttackConfig:
    l_seed: int = 16
    rounds: int = 10
    max_iterations: int = 50
    queries: Optional[int] = None

    @property
    def q_s(self) -> int:
        """Signatures per iteration, ceil(2^(l_seed/2) / R) unless overridden."""
        if self.queries is not None:
            return self.queries
        return max(1, math.ceil(2 ** (self.l_seed / 2) / self.rounds))


@dataclass
class Sighting:
    signature: int
    round: int
    challenge: int
    seed_y: Optional[bytes] = None      # known when the challenge was 1 or 3
    seed_pi: Optional[bytes] = None     # challenge 2 only
    shifted: Optional[FieldVector] = None  # y + e, challenge 2 only
    salt: bytes = b""

    @property
    def where(self) -> tuple[int, int]:
        return (self.signature, self.round)


@dataclass
class AttackOutcome:
    recovered_e: Optional[FieldVector] = None
    signatures_used: int = 0
    iterations: int = 0
    wall_time: float = 0.0
    pair: Optional[tuple] = None
    condition_pairs: int = 0
    x2_collisions: int = 0
    discarded: int = 0

    @property
    def recovered(self) -> bool:
        return self.recovered_e is not None

    def report(self, timing: bool = False) -> dict:
        out = {
            "recovered": self.recovered,
            "recovered_e": None if self.recovered_e is None else self.recovered_e.tolist(),
            "signatures_used": self.signatures_used,
            "iterations": self.iterations,
            "pair": None if self.pair is None else [list(p) for p in self.pair],
            "condition_pairs": self.condition_pairs,
            "x2_collisions": self.x2_collisions,
            "discarded": self.discarded,
        }
        if timing:
            out["wall_time"] = self.wall_time
        return out

    def to_json(self, timing: bool = False) -> str:
        return json.dumps(self.report(timing), sort_keys=True)


class CollisionIndex:
    """Digest -> sightings of that second commitment."""

    def __init__(self, params: SchemeParams, pk: SdInstance, freeze_index: bool = False):
        if params.variant not in (Variant.VULNERABLE, Variant.SALTED):
            raise ValueError("the collision index handles the per-round seeded variants only")
        self.params = params
        self.pk = pk
        self.suite = params.suite
        self.freeze_index = freeze_index
        self.table: dict[bytes, list[Sighting]] = {}
        self.signatures = 0
        self.condition_pairs = 0
        self.x2_collisions = 0
        self.discarded = 0

    def _ctx(self, salt: bytes, index: int):
        if not self.params.variant.salted:
            return None
        # a frozen context stays at the prover's starting index whatever is asked
        return SaltContext(salt, 0, frozen=self.freeze_index).at(index)

    def add(self, sig: Signature) -> Optional[tuple]:
        """Index one signature; returns (e, pair) on the first valid extraction."""
        k = self.signatures
        self.signatures += 1
        s, p = self.suite, self.params
        found = None
        for j, (c, op) in enumerate(zip(sig.challenges, sig.openings)):
            sight = Sighting(k, j, c, salt=sig.salt)
            if c == 2:
                x2 = op.commitment
                sight.seed_pi, sight.shifted = op.seed, op.vector
            else:
                if c == 1:
                    sight.seed_y = op.seed
                else:
                    sight.seed_y = s.expand_seed_pair(op.seed, self._ctx(sig.salt, 6 * j))[1]
                z2 = s.expand_vector(sight.seed_y, p.n, p.q, self._ctx(sig.salt, 6 * j + 2))
                x2 = s.commit(z2.to_bytes(), self._ctx(sig.salt, 6 * j + 4))
            bucket = self.table.setdefault(x2, [])
            for other in bucket:
                self.x2_collisions += 1
                if (other.challenge == 2) == (c == 2):
                    continue
                self.condition_pairs += 1
                if found is None:
                    opened, hidden = (sight, other) if c == 2 else (other, sight)
                    e = self.extract(opened, hidden)
                    if e is None:
                        self.discarded += 1
                    else:
                        found = (e, (opened.where, hidden.where))
            bucket.append(sight)
        return found

    def extract(self, opened: Sighting, hidden: Sighting) -> Optional[FieldVector]:
        """``e`` from a challenge-2 opening and a sighting that knows the vector seed."""
        s, p = self.suite, self.params
        j = opened.round
        perm = s.expand_permutation(opened.seed_pi, p.n, self._ctx(opened.salt, 6 * j + 1))
        # the colliding round's z2; for a true seed collision this equals pi(y)
        z2 = s.expand_vector(hidden.seed_y, p.n, p.q, self._ctx(hidden.salt, 6 * hidden.round + 2))
        masked = apply_permutation(perm, opened.shifted) - z2
        e = apply_permutation(perm.inverse(), masked)
        return e if self.pk.is_solution(e) else None


def signing_oracle(params: SchemeParams, keypair: SdKeyPair, rng, **hooks) -> Oracle:
    def oracle(message: bytes) -> Signature:
        return sign(params, message, keypair, rng, **hooks)
    return oracle


def _message(k: int) -> bytes:
    return b"query-%d" % k


def run_attack(cfg: AttackConfig, oracle: Oracle, pk: SdInstance, params: SchemeParams,
               freeze_index: bool = False) -> AttackOutcome:
    """Up to ``cfg.max_iterations`` batches of ``q_s`` queries, each with a fresh index."""
    out = AttackOutcome()
    start = time.perf_counter()
    for it in range(cfg.max_iterations):
        out.iterations = it + 1
        index = CollisionIndex(params, pk, freeze_index)
        hit = None
        for _ in range(cfg.q_s):
            sig = oracle(_message(out.signatures_used))
            out.signatures_used += 1
            hit = index.add(sig)
            if hit is not None:
                break
        out.condition_pairs += index.condition_pairs
        out.x2_collisions += index.x2_collisions
        out.discarded += index.discarded
        if hit is not None:
            out.recovered_e, out.pair = hit
            break
    out.wall_time = time.perf_counter() - start
    return out


def run_negative_control(cfg: AttackConfig, oracle: Oracle, pk: SdInstance, params: SchemeParams,
                         budget_factor: int = 100, freeze_index: bool = False) -> AttackOutcome:
    """One index over ``budget_factor * q_s`` salted signatures, never stopping early."""
    out = AttackOutcome(iterations=1)
    start = time.perf_counter()
    index = CollisionIndex(params, pk, freeze_index)
    for _ in range(budget_factor * cfg.q_s):
        hit = index.add(oracle(_message(out.signatures_used)))
        out.signatures_used += 1
        if hit is not None and out.recovered_e is None:
            out.recovered_e, out.pair = hit
    out.condition_pairs = index.condition_pairs
    out.x2_collisions = index.x2_collisions
    out.discarded = index.discarded
    out.wall_time = time.perf_counter() - start
    return out


def attack_params(cfg: AttackConfig, n: int = 24, k: int = 12, w: int = 6, q: int = 2,
                  salted: bool = False, l_comm: int = 256, l_salt: int = 256, **kw) -> SchemeParams:
    """Desk-scale parameters for the attack experiments."""
    variant = Variant.SALTED if salted else Variant.VULNERABLE
    return SchemeParams(variant, n, k, w, q, rounds=cfg.rounds, l_seed=cfg.l_seed,
                        l_comm=l_comm, l_salt=l_salt, **kw)
