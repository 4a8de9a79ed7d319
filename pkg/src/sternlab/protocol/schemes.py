"""Prover, verifier and simulator for each variant.

Salted index schedule: round ``j`` (0-based) owns indices ``6j .. 6j+5`` for
E0, E1, E2 and the three commitments, in that order.  The salted variant puts
its global commitment at ``6R``.  The tree variant leaves the E0 slot unused
(leaf seeds come from the seed trees), then gives group ``g`` the fifteen
indices starting at ``6R + 15g``: three J calls for the permutation-seed tree,
three for the vector-seed tree, then three L calls for each of the three
commitment trees.  Its global commitment sits at ``6R + 15G``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional


from ..algebra import (
    FieldVector,
    Permutation,
    apply_permutation,
    mat_vec,
    random_permutation,
    random_vector,
    sample_sphere,
    weight,
)
from ..primitives import (
    CommitTree4,
    SaltContext,
    SeedTree4,
    nbytes,
    random_bits,
    tree_cover,
    truncate_bits,
)
from ..problems import SdInstance
from .params import ROUNDS_PER_GROUP, Reject, SchemeParams, Variant, Verdict
from .transcript import (
    GenericOpening,
    SeededOpening,
    Transcript,
    TreeOpening,
    group_leaves,
    opening_sizes,
)

SLOTS_PER_ROUND = 6
SLOTS_PER_GROUP = 15


def _at(ctx: Optional[SaltContext], index: int) -> Optional[SaltContext]:
    return None if ctx is None else ctx.at(index)


def z1_bytes(perm: Permutation, t: FieldVector) -> bytes:
    return perm.to_bytes() + t.to_bytes()


def parse_z1(raw: bytes, n: int, q: int) -> tuple[Permutation, FieldVector]:
    try:
        return Permutation.from_bytes(raw[:n]), FieldVector.from_bytes(raw[n:], q)
    except ValueError as exc:
        raise Reject(f"malformed first string: {exc}", malformed=True) from None


@dataclass
class RoundSecrets:
    perm: Permutation
    y: FieldVector
    t: FieldVector
    z2: FieldVector
    z3: FieldVector
    secret: FieldVector
    payloads: tuple
    commitments: tuple
    seed: Optional[bytes] = None
    seed_pi: Optional[bytes] = None
    seed_y: Optional[bytes] = None
    nonces: Optional[tuple] = None

    @property
    def masked_secret(self) -> FieldVector:
        """``pi(e)``, the vector opened for challenge 1."""
        return apply_permutation(self.perm, self.secret)


@dataclass
class ProverState:
    params: SchemeParams
    pk: SdInstance
    salt: bytes
    rounds: list
    xt: bytes
    freeze_index: bool = False
    trees: list = field(default_factory=list)


def _context(params: SchemeParams, salt: bytes, freeze_index: bool) -> Optional[SaltContext]:
    if not params.variant.salted:
        return None
    return SaltContext(salt, 0, frozen=freeze_index)


def global_index(params: SchemeParams) -> int:
    if params.variant is Variant.TREE:
        return SLOTS_PER_ROUND * params.rounds + SLOTS_PER_GROUP * params.groups
    return SLOTS_PER_ROUND * params.rounds


def _fake(fakes, j):
    return (None, None) if fakes is None or fakes[j] is None else fakes[j]


def seeded_round(params: SchemeParams, pk: SdInstance, secret: FieldVector, j: int,
                 ctx: Optional[SaltContext], seed_pi: bytes, seed_y: bytes,
                 t_offset: Optional[FieldVector] = None) -> RoundSecrets:
    """Round ``j`` from its two leaf seeds (E1, E2 and the commitments)."""
    suite = params.suite
    base = SLOTS_PER_ROUND * j
    perm = suite.expand_permutation(seed_pi, params.n, _at(ctx, base + 1))
    z2 = suite.expand_vector(seed_y, params.n, params.q, _at(ctx, base + 2))
    y = apply_permutation(perm.inverse(), z2)
    t = mat_vec(pk.H, y)
    if t_offset is not None:
        t = t + t_offset
    z3 = z2 + apply_permutation(perm, secret)
    payloads = (z1_bytes(perm, t), z2.to_bytes(), z3.to_bytes())
    commitments = tuple(suite.commit(p, _at(ctx, base + 3 + i)) for i, p in enumerate(payloads))
    return RoundSecrets(perm, y, t, z2, z3, secret, payloads, commitments,
                        seed_pi=seed_pi, seed_y=seed_y)


class Scheme:
    """Shared driver; subclasses fill in the per-variant pieces."""

    def __init__(self, params: SchemeParams):
        self.params = params
        self.suite = params.suite

    # prover

    def commit(self, pk: SdInstance, secret: FieldVector, rng, salt: Optional[bytes] = None,
               freeze_index: bool = False, fakes=None) -> ProverState:
        """First move.  ``fakes`` (one ``(vector, t_offset)`` or None per round)
        replaces the secret round by round; it exists for the impersonation
        experiment."""
        p = self.params
        if p.variant.salted:
            salt = self.suite.random_salt(rng) if salt is None else truncate_bits(salt, p.l_salt)
        else:
            salt = b""
        ctx = _context(p, salt, freeze_index)
        state = ProverState(p, pk, salt, [], b"", freeze_index)
        self._commit_rounds(state, secret, rng, ctx, fakes)
        state.xt = self.suite.global_commit(self._roots(state), _at(ctx, global_index(p)))
        return state

    def _roots(self, state: ProverState) -> list:
        return [x for r in state.rounds for x in r.commitments]

    def respond(self, state: ProverState, challenges) -> Transcript:
        challenges = tuple(challenges)
        if len(challenges) != self.params.rounds or any(c not in (1, 2, 3) for c in challenges):
            raise ValueError("need one challenge in {1, 2, 3} per round")
        openings = self._openings(state, challenges)
        return Transcript(self.params.variant, state.xt, state.salt, challenges, tuple(openings))

    # verifier

    def recover(self, pk: SdInstance, tr: Transcript, freeze_index: bool = False) -> list:
        """Commitments feeding the global hash, rebuilt from the openings."""
        p = self.params
        if tr.variant is not p.variant:
            raise Reject("variant mismatch", malformed=True)
        if len(tr.challenges) != p.rounds or any(c not in (1, 2, 3) for c in tr.challenges):
            raise Reject("bad challenge vector", malformed=True)
        if len(tr.xt) != nbytes(p.l_comm) or len(tr.salt) != nbytes(p.salt_bits):
            raise Reject("bad global commitment or salt length", malformed=True)
        ctx = _context(p, tr.salt, freeze_index)
        return self._recover(pk, tr, ctx)

    def verify(self, pk: SdInstance, tr: Transcript, freeze_index: bool = False) -> Verdict:
        try:
            parts = self.recover(pk, tr, freeze_index)
        except Reject as r:
            return r.verdict()
        ctx = _context(self.params, tr.salt, freeze_index)
        if self.suite.global_commit(parts, _at(ctx, global_index(self.params))) != tr.xt:
            return Verdict(False, "global commitment mismatch")
        return Verdict(True)

    # simulator

    def simulate(self, pk: SdInstance, rng, challenges=None) -> Transcript:
        """Accepting transcript built from the public key alone."""
        p = self.params
        if challenges is None:
            challenges = [rng.randrange(3) + 1 for _ in range(p.rounds)]
        challenges = tuple(challenges)
        salt = self.suite.random_salt(rng) if p.variant.salted else b""
        openings = self._simulated_openings(pk, rng, challenges)
        tr = Transcript(p.variant, b"\x00" * nbytes(p.l_comm), salt, challenges, tuple(openings))
        parts = self.recover(pk, tr)
        xt = self.suite.global_commit(parts, _at(_context(p, salt, False), global_index(p)))
        return Transcript(p.variant, xt, salt, challenges, tuple(openings))

    # helpers

    def _check_vector(self, v) -> FieldVector:
        if not isinstance(v, FieldVector) or len(v) != self.params.n or v.q != self.params.q:
            raise Reject("opened vector has the wrong shape", malformed=True)
        return v

    def _check_bits(self, raw, bits: int, what: str) -> bytes:
        if not isinstance(raw, bytes) or len(raw) != nbytes(bits) or truncate_bits(raw, bits) != raw:
            raise Reject(f"malformed {what}", malformed=True)
        return raw

    def _open_weight_side(self, pk, j, ctx, seed_y, masked_secret):
        """Challenge 1: (x2, x3) from the vector seed and pi(e)."""
        p, s = self.params, self.suite
        base = SLOTS_PER_ROUND * j
        if weight(masked_secret, p.kind) != p.w:
            raise Reject("opened error vector has the wrong weight")
        z2 = s.expand_vector(seed_y, p.n, p.q, _at(ctx, base + 2))
        z3 = z2 + masked_secret
        return s.commit(z2.to_bytes(), _at(ctx, base + 4)), s.commit(z3.to_bytes(), _at(ctx, base + 5))

    def _open_syndrome_side(self, pk, j, ctx, seed_pi, shifted):
        """Challenge 2: (x1, x3) from the permutation seed and y + e."""
        p, s = self.params, self.suite
        base = SLOTS_PER_ROUND * j
        perm = s.expand_permutation(seed_pi, p.n, _at(ctx, base + 1))
        z3 = apply_permutation(perm, shifted)
        t = mat_vec(pk.H, shifted) - pk.s
        return (s.commit(z1_bytes(perm, t), _at(ctx, base + 3)),
                s.commit(z3.to_bytes(), _at(ctx, base + 5)))

    def _open_mask_side(self, pk, j, ctx, seed_pi, seed_y):
        """Challenge 3: (x1, x2) from both leaf seeds."""
        p, s = self.params, self.suite
        base = SLOTS_PER_ROUND * j
        perm = s.expand_permutation(seed_pi, p.n, _at(ctx, base + 1))
        z2 = s.expand_vector(seed_y, p.n, p.q, _at(ctx, base + 2))
        t = mat_vec(pk.H, apply_permutation(perm.inverse(), z2))
        return (s.commit(z1_bytes(perm, t), _at(ctx, base + 3)),
                s.commit(z2.to_bytes(), _at(ctx, base + 4)))


class GenericScheme(Scheme):
    """Fresh randomness per round and randomized commitments; openings carry
    the raw strings plus their nonces."""

    def _commit_rounds(self, state, secret, rng, ctx, fakes):
        p, s, pk = self.params, self.suite, state.pk
        for j in range(p.rounds):
            e, dt = _fake(fakes, j)
            e = secret if e is None else e
            perm = random_permutation(p.n, rng)
            y = random_vector(p.n, p.q, rng)
            t = mat_vec(pk.H, y)
            if dt is not None:
                t = t + dt
            z2 = apply_permutation(perm, y)
            z3 = apply_permutation(perm, y + e)
            payloads = (z1_bytes(perm, t), z2.to_bytes(), z3.to_bytes())
            pairs = [s.commit_randomized(z, rng) for z in payloads]
            state.rounds.append(RoundSecrets(
                perm, y, t, z2, z3, e, payloads, tuple(x for x, _ in pairs),
                nonces=tuple(r for _, r in pairs)))

    def _openings(self, state, challenges):
        out = []
        for r, c in zip(state.rounds, challenges):
            a, b = [i for i in (0, 1, 2) if i != c - 1]
            out.append(GenericOpening(r.commitments[c - 1], (r.payloads[a], r.payloads[b]),
                                      (r.nonces[a], r.nonces[b])))
        return out

    def _recover(self, pk, tr, ctx):
        p, s = self.params, self.suite
        parts = []
        for c, op in zip(tr.challenges, tr.openings):
            if not isinstance(op, GenericOpening):
                raise Reject("opening of the wrong kind", malformed=True)
            sizes = opening_sizes(p, c)
            fields = [op.commitment, *op.strings, *op.nonces]
            if len(fields) != 5 or any(not isinstance(f, bytes) or len(f) != n
                                       for f, n in zip(fields, sizes)):
                raise Reject("opening fields have the wrong length", malformed=True)
            for rho in op.nonces:
                self._check_bits(rho, s.nonce_bits, "nonce")
            a, b = [i for i in (1, 2, 3) if i != c]
            z = {a: op.strings[0], b: op.strings[1]}
            self._check_generic_relation(pk, c, z)
            x = {a: s.commit(z[a] + op.nonces[0]), b: s.commit(z[b] + op.nonces[1]),
                 c: op.commitment}
            parts.extend([x[1], x[2], x[3]])
        return parts

    def _check_generic_relation(self, pk, c, z):
        p = self.params
        try:
            vec = {i: FieldVector.from_bytes(z[i], p.q) for i in (2, 3) if i in z}
        except ValueError as exc:
            raise Reject(f"malformed string: {exc}", malformed=True) from None
        if c == 1:
            if weight(vec[3] - vec[2], p.kind) != p.w:
                raise Reject("opened error vector has the wrong weight")
            return
        perm, t = parse_z1(z[1], p.n, p.q)
        if len(t) != p.n - p.k:
            raise Reject("syndrome has the wrong length", malformed=True)
        inv = perm.inverse()
        if c == 2 and mat_vec(pk.H, apply_permutation(inv, vec[3])) != t + pk.s:
            raise Reject("syndrome relation fails")
        if c == 3 and mat_vec(pk.H, apply_permutation(inv, vec[2])) != t:
            raise Reject("syndrome relation fails")

    def _simulated_openings(self, pk, rng, challenges):
        p, s = self.params, self.suite
        out = []
        for c in challenges:
            z = simulate_round_strings(pk, c, random_permutation(p.n, rng),
                                       random_vector(p.n, p.q, rng),
                                       sample_sphere(p.n, p.q, p.w, p.kind, rng))
            hidden_len = p.n + (p.n - p.k) if c == 1 else p.n
            x_c, _ = s.commit_randomized(b"\x00" * hidden_len, rng)
            a, b = sorted(z)
            nonces = (random_bits(s.nonce_bits, rng), random_bits(s.nonce_bits, rng))
            out.append(GenericOpening(x_c, (z[a], z[b]), nonces))
        return out


def simulate_round_strings(pk: SdInstance, c: int, perm: Permutation, vec: FieldVector,
                           err: FieldVector) -> dict:
    """The two strings a simulator opens for challenge ``c``, keyed 1..3.

    ``vec`` plays the uniform vector of each case and ``err`` the uniform
    weight-w vector (used only for challenge 1).
    """
    if c == 1:
        return {2: vec.to_bytes(), 3: (vec + err).to_bytes()}
    if c == 2:
        t = mat_vec(pk.H, vec) - pk.s
        return {1: z1_bytes(perm, t), 3: apply_permutation(perm, vec).to_bytes()}
    t = mat_vec(pk.H, vec)
    return {1: z1_bytes(perm, t), 2: apply_permutation(perm, vec).to_bytes()}


def round_strings(pk: SdInstance, secret: FieldVector, perm: Permutation, y: FieldVector) -> dict:
    """All three strings of an honest round, keyed 1..3."""
    t = mat_vec(pk.H, y)
    return {1: z1_bytes(perm, t), 2: apply_permutation(perm, y).to_bytes(),
            3: apply_permutation(perm, y + secret).to_bytes()}


class SeededScheme(Scheme):
    """Round seeds expanded through E0/E1/E2 with deterministic commitments;
    salted when the variant says so."""

    def _commit_rounds(self, state, secret, rng, ctx, fakes):
        p, s = self.params, self.suite
        for j in range(p.rounds):
            e, dt = _fake(fakes, j)
            seed = s.random_seed(rng)
            sp, sy = s.expand_seed_pair(seed, _at(ctx, SLOTS_PER_ROUND * j))
            r = seeded_round(p, state.pk, secret if e is None else e, j, ctx, sp, sy, dt)
            r.seed = seed
            state.rounds.append(r)

    def _openings(self, state, challenges):
        out = []
        for r, c in zip(state.rounds, challenges):
            if c == 1:
                out.append(SeededOpening(r.commitments[0], r.seed_y, r.masked_secret))
            elif c == 2:
                out.append(SeededOpening(r.commitments[1], r.seed_pi, r.y + r.secret))
            else:
                out.append(SeededOpening(r.commitments[2], r.seed))
        return out

    def _recover(self, pk, tr, ctx):
        p, s = self.params, self.suite
        parts = []
        for j, (c, op) in enumerate(zip(tr.challenges, tr.openings)):
            if not isinstance(op, SeededOpening):
                raise Reject("opening of the wrong kind", malformed=True)
            xc = self._check_bits(op.commitment, p.l_comm, "commitment")
            seed = self._check_bits(op.seed, p.l_seed, "seed")
            if c == 1:
                x2, x3 = self._open_weight_side(pk, j, ctx, seed, self._check_vector(op.vector))
                parts.extend([xc, x2, x3])
            elif c == 2:
                x1, x3 = self._open_syndrome_side(pk, j, ctx, seed, self._check_vector(op.vector))
                parts.extend([x1, xc, x3])
            else:
                if op.vector is not None:
                    raise Reject("unexpected vector for challenge 3", malformed=True)
                sp, sy = s.expand_seed_pair(seed, _at(ctx, SLOTS_PER_ROUND * j))
                x1, x2 = self._open_mask_side(pk, j, ctx, sp, sy)
                parts.extend([x1, x2, xc])
        return parts

    def _simulated_openings(self, pk, rng, challenges):
        p, s = self.params, self.suite
        out = []
        for c in challenges:
            hidden = random_bits(p.l_comm, rng)
            if c == 1:
                out.append(SeededOpening(hidden, s.random_seed(rng),
                                         sample_sphere(p.n, p.q, p.w, p.kind, rng)))
            elif c == 2:
                out.append(SeededOpening(hidden, s.random_seed(rng), random_vector(p.n, p.q, rng)))
            else:
                out.append(SeededOpening(hidden, s.random_seed(rng)))
        return out


class TreeScheme(Scheme):
    """Salted seeded rounds fused four at a time through seed and commitment trees."""

    def _group_base(self, g: int) -> int:
        return SLOTS_PER_ROUND * self.params.rounds + SLOTS_PER_GROUP * g

    def _commit_rounds(self, state, secret, rng, ctx, fakes):
        p, s = self.params, self.suite
        for g in range(p.groups):
            base = self._group_base(g)
            perm_tree = SeedTree4(s, s.random_seed(rng), ctx, base)
            vec_tree = SeedTree4(s, s.random_seed(rng), ctx, base + 3)
            rounds = []
            for i in range(ROUNDS_PER_GROUP):
                j = ROUNDS_PER_GROUP * g + i
                e, dt = _fake(fakes, j)
                rounds.append(seeded_round(p, state.pk, secret if e is None else e, j, ctx,
                                           perm_tree.leaves[i], vec_tree.leaves[i], dt))
            state.rounds.extend(rounds)
            commit_trees = [CommitTree4(s, [r.commitments[k] for r in rounds], ctx, base + 6 + 3 * k)
                            for k in range(3)]
            state.trees.append((perm_tree, vec_tree, commit_trees))

    def _roots(self, state):
        return [t.root for _, _, trees in state.trees for t in trees]

    def _openings(self, state, challenges):
        out = []
        for g, (perm_tree, vec_tree, ctrees) in enumerate(state.trees):
            cs = challenges[ROUNDS_PER_GROUP * g:ROUNDS_PER_GROUP * (g + 1)]
            lv = group_leaves(cs)
            rounds = state.rounds[ROUNDS_PER_GROUP * g:ROUNDS_PER_GROUP * (g + 1)]
            vectors = tuple(r.masked_secret if c == 1 else (r.y + r.secret if c == 2 else None)
                            for r, c in zip(rounds, cs))
            out.append(TreeOpening(
                tuple(perm_tree.reveal(lv["perm_seeds"]).values()),
                tuple(vec_tree.reveal(lv["vec_seeds"]).values()),
                tuple(ctrees[0].reveal(lv["first"]).values()),
                tuple(ctrees[1].reveal(lv["second"]).values()),
                tuple(rounds[i].commitments[2] for i in lv["third"]),
                vectors))
        return out

    def _nodes(self, leaves, values, bits, what):
        cover = tree_cover(leaves)
        if len(values) != len(cover):
            raise Reject(f"wrong number of {what}", malformed=True)
        return {k: self._check_bits(v, bits, what) for k, v in zip(cover, values)}

    def _recover(self, pk, tr, ctx):
        p, s = self.params, self.suite
        if len(tr.openings) != p.groups:
            raise Reject("wrong number of group openings", malformed=True)
        roots = []
        for g, op in enumerate(tr.openings):
            if not isinstance(op, TreeOpening) or len(op.vectors) != ROUNDS_PER_GROUP:
                raise Reject("opening of the wrong kind", malformed=True)
            cs = tr.challenges[ROUNDS_PER_GROUP * g:ROUNDS_PER_GROUP * (g + 1)]
            lv = group_leaves(cs)
            base = self._group_base(g)
            perm_seeds = SeedTree4.recover(
                s, self._nodes(lv["perm_seeds"], op.perm_seeds, p.l_seed, "permutation seeds"), ctx, base)
            vec_seeds = SeedTree4.recover(
                s, self._nodes(lv["vec_seeds"], op.vec_seeds, p.l_seed, "vector seeds"), ctx, base + 3)
            known = [self._nodes(lv["first"], op.first, p.l_comm, "first commitments"),
                     self._nodes(lv["second"], op.second, p.l_comm, "second commitments"), {}]
            if len(op.third) != len(lv["third"]):
                raise Reject("wrong number of third commitments", malformed=True)
            for i, x in zip(lv["third"], op.third):
                known[2][4 + i] = self._check_bits(x, p.l_comm, "third commitment")
            for i, c in enumerate(cs):
                j = ROUNDS_PER_GROUP * g + i
                v = op.vectors[i]
                if c == 1:
                    x2, x3 = self._open_weight_side(pk, j, ctx, vec_seeds[i], self._check_vector(v))
                    known[1][4 + i], known[2][4 + i] = x2, x3
                elif c == 2:
                    x1, x3 = self._open_syndrome_side(pk, j, ctx, perm_seeds[i], self._check_vector(v))
                    known[0][4 + i], known[2][4 + i] = x1, x3
                else:
                    if v is not None:
                        raise Reject("unexpected vector for challenge 3", malformed=True)
                    x1, x2 = self._open_mask_side(pk, j, ctx, perm_seeds[i], vec_seeds[i])
                    known[0][4 + i], known[1][4 + i] = x1, x2
            for k in range(3):
                root = CommitTree4.recover_root(s, known[k], ctx, base + 6 + 3 * k)
                if root is None:
                    raise Reject("commitment tree incomplete", malformed=True)
                roots.append(root)
        return roots

    def _simulated_openings(self, pk, rng, challenges):
        p, s = self.params, self.suite
        out = []
        for g in range(p.groups):
            cs = challenges[ROUNDS_PER_GROUP * g:ROUNDS_PER_GROUP * (g + 1)]
            lv = group_leaves(cs)
            vectors = tuple(sample_sphere(p.n, p.q, p.w, p.kind, rng) if c == 1
                            else (random_vector(p.n, p.q, rng) if c == 2 else None) for c in cs)
            out.append(TreeOpening(
                tuple(s.random_seed(rng) for _ in tree_cover(lv["perm_seeds"])),
                tuple(s.random_seed(rng) for _ in tree_cover(lv["vec_seeds"])),
                tuple(random_bits(p.l_comm, rng) for _ in tree_cover(lv["first"])),
                tuple(random_bits(p.l_comm, rng) for _ in tree_cover(lv["second"])),
                tuple(random_bits(p.l_comm, rng) for _ in lv["third"]),
                vectors))
        return out


def scheme_for(params: SchemeParams) -> Scheme:
    if params.variant is Variant.GENERIC:
        return GenericScheme(params)
    if params.variant is Variant.TREE:
        return TreeScheme(params)
    return SeededScheme(params)
