"""Vectors over prime fields, coordinate permutations and weight functions.

Everything here is an immutable value.  A permutation ``p`` acts on a vector
``v`` by ``p(v)[i] = v[p[i]]``; the same convention is used across the package.
"""

from __future__ import annotations

import enum
import math
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

MAX_Q = 251

Decomposition = tuple  # (c_0, ..., c_{q-1}); c_i counts coordinates equal to i


class EmptySphereError(ValueError):
    """No vector of the requested weight exists."""


def _is_prime(q: int) -> bool:
    if q < 2:
        return False
    return all(q % d for d in range(2, math.isqrt(q) + 1))


def check_modulus(q: int) -> int:
    if not (2 <= q <= MAX_Q and _is_prime(q)):
        raise ValueError(f"q must be a prime in [2, {MAX_Q}], got {q}")
    return q


class WeightKind(enum.Enum):
    HAMMING = "hamming"
    LEE = "lee"

    def distance(self, a: int, q: int) -> int:
        """Distance of the symbol ``a`` to zero."""
        if self is WeightKind.HAMMING:
            return 0 if a == 0 else 1
        return min(a, q - a)

    def max_distance(self, q: int) -> int:
        return 1 if self is WeightKind.HAMMING else q // 2

    def table(self, q: int) -> np.ndarray:
        return _distance_table(self, q)


@lru_cache(maxsize=None)
def _distance_table(kind: WeightKind, q: int) -> np.ndarray:
    t = np.array([kind.distance(a, q) for a in range(q)], dtype=np.int64)
    t.flags.writeable = False
    return t


class FieldVector:
    """An element of F_q^n."""

    __slots__ = ("q", "entries")

    def __init__(self, entries, q: int):
        arr = np.array(entries, dtype=np.int64).reshape(-1)
        if arr.size and (arr.min() < 0 or arr.max() >= q):
            raise ValueError(f"entries must lie in [0, {q})")
        arr.flags.writeable = False
        self.q = q
        self.entries = arr

    @classmethod
    def _wrap(cls, arr: np.ndarray, q: int) -> "FieldVector":
        # trusted constructor: arr is already reduced mod q and owned by us
        v = object.__new__(cls)
        arr.flags.writeable = False
        v.q = q
        v.entries = arr
        return v

    @classmethod
    def zeros(cls, n: int, q: int) -> "FieldVector":
        return cls._wrap(np.zeros(n, dtype=np.int64), q)

    @classmethod
    def from_bytes(cls, data: bytes, q: int) -> "FieldVector":
        return cls(np.frombuffer(data, dtype=np.uint8), q)

    def __len__(self) -> int:
        return self.entries.size

    def __iter__(self) -> Iterator[int]:
        return iter(self.entries.tolist())

    def __getitem__(self, i):
        return int(self.entries[i])

    def _check(self, other: "FieldVector") -> None:
        if self.q != other.q or len(self) != len(other):
            raise ValueError("vectors differ in length or field")

    def __add__(self, other: "FieldVector") -> "FieldVector":
        self._check(other)
        return FieldVector._wrap((self.entries + other.entries) % self.q, self.q)

    def __sub__(self, other: "FieldVector") -> "FieldVector":
        self._check(other)
        return FieldVector._wrap((self.entries - other.entries) % self.q, self.q)

    def __neg__(self) -> "FieldVector":
        return FieldVector._wrap((-self.entries) % self.q, self.q)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FieldVector):
            return NotImplemented
        return self.q == other.q and np.array_equal(self.entries, other.entries)

    def __hash__(self) -> int:
        return hash((self.q, self.entries.tobytes()))

    def __repr__(self) -> str:
        return f"FieldVector({self.entries.tolist()}, q={self.q})"

    def to_bytes(self) -> bytes:
        """One byte per symbol."""
        return self.entries.astype(np.uint8).tobytes()

    def tolist(self) -> list[int]:
        return self.entries.tolist()


class Permutation:
    """A bijection on ``range(n)`` stored as its image list."""

    __slots__ = ("mapping",)

    def __init__(self, mapping: Sequence[int]):
        arr = np.array(mapping, dtype=np.int64).reshape(-1)
        if not np.array_equal(np.sort(arr), np.arange(arr.size)):
            raise ValueError("mapping is not a permutation of range(n)")
        arr.flags.writeable = False
        self.mapping = arr

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> "Permutation":
        p = object.__new__(cls)
        arr.flags.writeable = False
        p.mapping = arr
        return p

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls._wrap(np.arange(n, dtype=np.int64))

    def __len__(self) -> int:
        return self.mapping.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, Permutation):
            return NotImplemented
        return np.array_equal(self.mapping, other.mapping)

    def __hash__(self) -> int:
        return hash(self.mapping.tobytes())

    def __repr__(self) -> str:
        return f"Permutation({self.mapping.tolist()})"

    def inverse(self) -> "Permutation":
        return Permutation._wrap(np.argsort(self.mapping, kind="stable"))

    def compose(self, other: "Permutation") -> "Permutation":
        """Return ``r`` with ``r(v) == self(other(v))``."""
        if len(self) != len(other):
            raise ValueError("length mismatch")
        return Permutation._wrap(other.mapping[self.mapping])

    def to_bytes(self) -> bytes:
        if len(self) > 256:
            raise ValueError("byte encoding supports n <= 256")
        return self.mapping.astype(np.uint8).tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "Permutation":
        return cls(np.frombuffer(data, dtype=np.uint8))

    def tolist(self) -> list[int]:
        return self.mapping.tolist()


def apply_permutation(p: Permutation, v: FieldVector) -> FieldVector:
    if len(p) != len(v):
        raise ValueError(f"permutation of length {len(p)} applied to vector of length {len(v)}")
    return FieldVector._wrap(v.entries[p.mapping], v.q)


def weight(v: FieldVector, kind: WeightKind) -> int:
    return int(kind.table(v.q)[v.entries].sum())


def decompose(v: FieldVector) -> Decomposition:
    return tuple(np.bincount(v.entries, minlength=v.q).tolist())


def multinomial(d: Decomposition) -> int:
    """Number of vectors with decomposition ``d``: n! / prod(c_i!)."""
    if any(c < 0 for c in d):
        raise ValueError("negative count in decomposition")
    out = math.factorial(sum(d))
    for c in d:
        out //= math.factorial(c)
    return out


def decomposition_weight(d: Decomposition, kind: WeightKind) -> int:
    q = len(d)
    return sum(c * kind.distance(a, q) for a, c in enumerate(d))


def canonical_vector(d: Decomposition) -> FieldVector:
    """The nondecreasing vector with decomposition ``d``."""
    q = len(d)
    return FieldVector(np.repeat(np.arange(q), d), q)


def decompositions(n: int, q: int, w: int | None = None,
                   kind: WeightKind = WeightKind.HAMMING) -> Iterator[Decomposition]:
    """All decompositions of length-n vectors over F_q, in lexicographic order.

    With ``w`` given, only those of weight ``w`` (the set C_w).
    """
    dist = [kind.distance(a, q) for a in range(q)]

    def rec(i, left, wleft, prefix):
        if i == q - 1:
            if w is None or wleft == dist[i] * left:
                yield prefix + (left,)
            return
        for c in range(left + 1):
            if w is not None and dist[i] * c > wleft:
                break
            yield from rec(i + 1, left - c, None if w is None else wleft - dist[i] * c, prefix + (c,))

    yield from rec(0, n, w, ())


def _symbol_distance_counts(q: int, kind: WeightKind) -> list[int]:
    counts = [0] * (kind.max_distance(q) + 1)
    for a in range(q):
        counts[kind.distance(a, q)] += 1
    return counts


def _step(prev: np.ndarray, per_symbol: list[int]) -> np.ndarray:
    cur = prev * per_symbol[0]
    for d in range(1, len(per_symbol)):
        if per_symbol[d]:
            cur[d:] += prev[:-d] * per_symbol[d] if d < prev.size else 0
    return cur


@lru_cache(maxsize=256)
def _sphere_rows(n: int, q: int, kind: WeightKind, w: int) -> tuple[np.ndarray, ...]:
    """``rows[m][u]`` = number of length-m vectors of weight u, for u <= w."""
    per_symbol = _symbol_distance_counts(q, kind)
    row = np.zeros(w + 1, dtype=object)
    row[0] = 1
    rows = [row]
    for _ in range(n):
        rows.append(_step(rows[-1], per_symbol))
    return tuple(rows)


def sphere_count(n: int, q: int, w: int, kind: WeightKind) -> int:
    """Exact number of vectors in F_q^n of weight ``w``."""
    if w < 0 or w > n * kind.max_distance(q):
        return 0
    per_symbol = _symbol_distance_counts(q, kind)
    row = np.zeros(w + 1, dtype=object)
    row[0] = 1
    for _ in range(n):
        row = _step(row, per_symbol)
    return int(row[w])


def sphere_size_log2(n: int, q: int, w: int, kind: WeightKind) -> float:
    count = sphere_count(n, q, w, kind)
    if count == 0:
        raise EmptySphereError(f"empty sphere: no vector of weight {w} in F_{q}^{n} ({kind.value})")
    return math.log2(count)


def _sphere_rows_checked(n, q, w, kind):
    if w < 0 or w > n * kind.max_distance(q):
        raise EmptySphereError(f"empty sphere: no vector of weight {w} in F_{q}^{n} ({kind.value})")
    rows = _sphere_rows(n, q, kind, w)
    if rows[n][w] == 0:
        raise EmptySphereError(f"empty sphere: no vector of weight {w} in F_{q}^{n} ({kind.value})")
    return rows


def sample_sphere(n: int, q: int, w: int, kind: WeightKind, rng) -> FieldVector:
    """Uniform vector of weight ``w``.

    Coordinates are drawn left to right, each symbol chosen with probability
    proportional to the number of completions of the remaining weight.
    """
    rows = _sphere_rows_checked(n, q, w, kind)
    dist = [kind.distance(a, q) for a in range(q)]
    out = []
    left = w
    for i in range(n):
        rest = rows[n - i - 1]
        r = rng.randrange(int(rows[n - i][left]))
        for a in range(q):
            rem = left - dist[a]
            cnt = int(rest[rem]) if rem >= 0 else 0
            if r < cnt:
                out.append(a)
                left = rem
                break
            r -= cnt
    return FieldVector._wrap(np.array(out, dtype=np.int64), q)


def iter_sphere(n: int, q: int, w: int, kind: WeightKind) -> Iterator[FieldVector]:
    """Weight-w vectors in lexicographic order (branches with no completion are pruned)."""
    try:
        rows = _sphere_rows_checked(n, q, w, kind)
    except EmptySphereError:
        return
    dist = [kind.distance(a, q) for a in range(q)]
    buf = [0] * n

    def rec(i, left):
        if i == n:
            yield FieldVector._wrap(np.array(buf, dtype=np.int64), q)
            return
        rest = rows[n - i - 1]
        for a in range(q):
            rem = left - dist[a]
            if rem >= 0 and rest[rem]:
                buf[i] = a
                yield from rec(i + 1, rem)

    yield from rec(0, w)


def random_vector(n: int, q: int, rng) -> FieldVector:
    return FieldVector._wrap(np.array([rng.randrange(q) for _ in range(n)], dtype=np.int64), q)


def random_permutation(n: int, rng) -> Permutation:
    m = list(range(n))
    rng.shuffle(m)
    return Permutation._wrap(np.array(m, dtype=np.int64))


def random_matrix(rows: int, cols: int, q: int, rng) -> np.ndarray:
    m = np.array([rng.randrange(q) for _ in range(rows * cols)], dtype=np.int64).reshape(rows, cols)
    m.flags.writeable = False
    return m


def mat_vec(H: np.ndarray, v: FieldVector) -> FieldVector:
    return FieldVector._wrap((H @ v.entries) % v.q, v.q)


def solve_linear(H: np.ndarray, s: FieldVector) -> FieldVector | None:
    """Some x with H x = s over F_q, or None when the system is inconsistent."""
    q = s.q
    rows, cols = H.shape
    A = np.concatenate([np.array(H, dtype=np.int64) % q, s.entries.reshape(-1, 1)], axis=1)
    pivots = []
    r = 0
    for c in range(cols):
        nz = [i for i in range(r, rows) if A[i, c]]
        if not nz:
            continue
        A[[r, nz[0]]] = A[[nz[0], r]]
        A[r] = (A[r] * pow(int(A[r, c]), -1, q)) % q
        for i in range(rows):
            if i != r and A[i, c]:
                A[i] = (A[i] - A[i, c] * A[r]) % q
        pivots.append(c)
        r += 1
        if r == rows:
            break
    if any(A[i, -1] for i in range(r, rows)):
        return None
    x = np.zeros(cols, dtype=np.int64)
    for i, c in enumerate(pivots):
        x[c] = A[i, -1]
    return FieldVector._wrap(x, q)
