"""Syndrome decoding and permuted kernel instances, brute-force solvers, and
the SD -> PKP reduction."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import (
    EmptySphereError,
    FieldVector,
    Permutation,
    WeightKind,
    apply_permutation,
    canonical_vector,
    check_modulus,
    decompositions,
    iter_sphere,
    mat_vec,
    multinomial,
    random_matrix,
    random_permutation,
    sample_sphere,
    sphere_count,
    weight,
)

BRUTE_FORCE_LIMIT = 1 << 24


class InstanceTooLarge(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SdInstance:
    H: np.ndarray
    s: FieldVector
    w: int
    kind: WeightKind = WeightKind.HAMMING

    def __post_init__(self):
        rows, cols = self.H.shape
        if len(self.s) != rows:
            raise ValueError("syndrome length does not match H")
        if self.H.size and (self.H.min() < 0 or self.H.max() >= self.q):
            raise ValueError("H has entries outside [0, q)")

    @property
    def q(self) -> int:
        return self.s.q

    @property
    def n(self) -> int:
        return self.H.shape[1]

    @property
    def k(self) -> int:
        return self.H.shape[1] - self.H.shape[0]

    def is_solution(self, e: FieldVector) -> bool:
        return len(e) == self.n and weight(e, self.kind) == self.w and mat_vec(self.H, e) == self.s

    def __eq__(self, other) -> bool:
        if not isinstance(other, SdInstance):
            return NotImplemented
        return (np.array_equal(self.H, other.H) and self.s == other.s
                and self.w == other.w and self.kind is other.kind)


@dataclass(frozen=True, eq=False)
class PkpInstance:
    H: np.ndarray
    s: FieldVector
    v: FieldVector

    def __post_init__(self):
        if len(self.s) != self.H.shape[0] or len(self.v) != self.H.shape[1]:
            raise ValueError("inconsistent PKP dimensions")

    @property
    def n(self) -> int:
        return self.H.shape[1]

    def is_solution(self, sigma: Permutation) -> bool:
        return mat_vec(self.H, apply_permutation(sigma, self.v)) == self.s


@dataclass(frozen=True)
class SdKeyPair:
    public: SdInstance
    secret: FieldVector

    def __post_init__(self):
        if not self.public.is_solution(self.secret):
            raise ValueError("secret does not solve the public instance")


def sample_sd(n: int, k: int, w: int, q: int, kind: WeightKind, rng) -> SdKeyPair:
    """Uniform H, uniform e on the weight-w sphere, s = H e."""
    check_modulus(q)
    if not 0 < k < n:
        raise ValueError("need 0 < k < n")
    e = sample_sphere(n, q, w, kind, rng)
    H = random_matrix(n - k, n, q, rng)
    return SdKeyPair(SdInstance(H, mat_vec(H, e), w, kind), e)


def sample_pkp(n: int, k: int, q: int, v: FieldVector, rng) -> tuple[PkpInstance, Permutation]:
    # s = H sigma(v); a bare sigma(v) would not have the syndrome's length
    check_modulus(q)
    if len(v) != n or v.q != q:
        raise ValueError("pattern vector does not match (n, q)")
    H = random_matrix(n - k, n, q, rng)
    sigma = random_permutation(n, rng)
    return PkpInstance(H, mat_vec(H, apply_permutation(sigma, v)), v), sigma


def brute_force_sd(inst: SdInstance) -> FieldVector | None:
    """Lexicographically first solution, or None."""
    if inst.q ** inst.n > BRUTE_FORCE_LIMIT:
        raise InstanceTooLarge(f"q^n = {inst.q}^{inst.n} exceeds 2^24")
    for e in iter_sphere(inst.n, inst.q, inst.w, inst.kind):
        if mat_vec(inst.H, e) == inst.s:
            return e
    return None


def brute_force_pkp(inst: PkpInstance) -> Permutation | None:
    """Lexicographically first sigma with H sigma(v) = s, or None.

    Among indices holding equal symbols only the smallest unused one is tried
    at each position: any solution using a larger one maps to a smaller
    solution by swapping the two, so the search visits each distinct
    arrangement of v once.
    """
    n = inst.n
    if math.factorial(n) > BRUTE_FORCE_LIMIT:
        raise InstanceTooLarge(f"{n}! exceeds 2^24")
    q = inst.v.q
    H = np.array(inst.H, dtype=np.int64)
    target = inst.s.entries
    v = inst.v.tolist()
    used = [False] * n
    sigma = [0] * n

    def rec(i, acc):
        if i == n:
            return np.array_equal(acc % q, target)
        seen = set()
        for j in range(n):
            if used[j] or v[j] in seen:
                continue
            seen.add(v[j])
            used[j] = True
            sigma[i] = j
            if rec(i + 1, acc + H[:, i] * v[j]):
                return True
            used[j] = False
        return False

    if rec(0, np.zeros(H.shape[0], dtype=np.int64)):
        return Permutation(sigma)
    return None


def best_decomposition(n: int, q: int, w: int, kind: WeightKind) -> tuple:
    """Decomposition of weight w with the most vectors; ties go to the lexicographically smallest."""
    best, best_count = None, -1
    for d in decompositions(n, q, w, kind):
        c = multinomial(d)
        if c > best_count:
            best, best_count = d, c
    if best is None:
        raise EmptySphereError(f"empty sphere: no vector of weight {w} in F_{q}^{n} ({kind.value})")
    return best


def reduce_sd_to_pkp(inst: SdInstance) -> PkpInstance:
    """PKP instance over the same (H, s) whose pattern is the sorted vector of the
    most populous weight-w decomposition."""
    d = best_decomposition(inst.n, inst.q, inst.w, inst.kind)
    return PkpInstance(inst.H, inst.s, canonical_vector(d))


def pull_back(pkp: PkpInstance, sigma: Permutation) -> FieldVector:
    """SD solution sigma(v) from a PKP solution."""
    return apply_permutation(sigma, pkp.v)


def reduction_success_bound(n: int, q: int) -> float:
    """Lower bound 1 / binom(n+q-1, q-1) on the reduction's success probability."""
    return 1 / math.comb(n + q - 1, q - 1)


def reduction_success_exact(n: int, q: int, w: int, kind: WeightKind) -> float:
    """Exact probability that a uniform weight-w vector has the chosen decomposition."""
    d = best_decomposition(n, q, w, kind)
    return multinomial(d) / sphere_count(n, q, w, kind)
