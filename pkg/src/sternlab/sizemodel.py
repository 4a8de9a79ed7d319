"""Signature-size accounting: closed-form costs, the four-round hash-tree
formula, per-signature payload tallies and the q-by-metric tables.

Bits are counted information-theoretically: a seed costs ``l_seed``, a
commitment ``l_comm``, a weight-w vector ``s_w = log2 |S_w|``, a full vector
``n log2 q`` and a permutation ``log2 n!``.  Framing (header, length
prefixes, packed challenges, byte padding) is reported separately.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, replace
from fractions import Fraction

from .algebra import WeightKind, sphere_size_log2
from .primitives import nbytes, tree_cover
from .protocol import ROUNDS_PER_GROUP, SchemeParams, Transcript, Variant
from .protocol.params import DEFAULT_GROUPS
from .protocol.transcript import FRAMING_BYTES_PER_PAYLOAD, group_leaves, payload_length, payload_units

C1_SEED = Fraction(128, 81)
C1_COMM = Fraction(89, 81)

TABLE_QS = (2, 3, 5, 7, 13)
VERSIONS = ("non-optimized", "optimized", "hash-tree")
VERSION_TITLES = {
    "non-optimized": "Non-optimized version",
    "optimized": "Optimized version",
    "hash-tree": "Hash-tree version (4 levels)",
}

# Illustrative (n, k, w) per q for the built-in preset.
PRESET_CELLS = {
    2: (1000, 500, 110),
    3: (600, 300, 120),
    5: (300, 150, 60),
    7: (250, 125, 60),
    13: (200, 100, 60),
}


@dataclass(frozen=True)
class CostModel:
    n: int
    k: int
    w: int
    q: int
    kind: WeightKind = WeightKind.HAMMING
    rounds: int = 220
    l_seed: int = 128
    l_comm: int = 256
    l_salt: int = 256
    groups: int = DEFAULT_GROUPS

    @classmethod
    def from_params(cls, params: SchemeParams) -> "CostModel":
        groups = params.rounds // ROUNDS_PER_GROUP if params.variant is Variant.TREE else DEFAULT_GROUPS
        return cls(params.n, params.k, params.w, params.q, params.kind, params.rounds,
                   params.l_seed, params.l_comm, params.l_salt, groups)

    @property
    def s_w(self) -> float:
        return sphere_size_log2(self.n, self.q, self.w, self.kind)

    @property
    def vector_bits(self) -> float:
        return self.n * math.log2(self.q)

    @property
    def permutation_bits(self) -> float:
        return math.lgamma(self.n + 1) / math.log(2)

    @property
    def syndrome_bits(self) -> float:
        return (self.n - self.k) * math.log2(self.q)


def c1_by_enumeration(tree: int = 1) -> tuple[Fraction, Fraction]:
    """Expected (seed, commitment) node counts for one seed/commitment tree pair.

    Walks all 81 challenge patterns of a group.  Tree 1 reveals a permutation
    seed for challenges 2 and 3 and a first commitment for challenge 1;
    tree 2 reveals a vector seed for 1 and 3 and a second commitment for 2.
    """
    seed_key, comm_key = {1: ("perm_seeds", "first"), 2: ("vec_seeds", "second")}[tree]
    seeds = comms = Fraction(0)
    for cs in itertools.product((1, 2, 3), repeat=ROUNDS_PER_GROUP):
        lv = group_leaves(cs)
        seeds += len(tree_cover(lv[seed_key]))
        comms += len(tree_cover(lv[comm_key]))
    total = 3 ** ROUNDS_PER_GROUP
    return seeds / total, comms / total


def c1_bits(l_seed, l_comm) -> Fraction:
    return C1_SEED * l_seed + C1_COMM * l_comm


def cost_hash_tree(model: CostModel) -> float:
    """l_salt + G (2 C1 + 4 (s_w + n log2 q + l_comm) / 3)."""
    exact = model.l_salt + model.groups * (2 * c1_bits(model.l_seed, model.l_comm)
                                           + Fraction(4, 3) * model.l_comm)
    return float(exact) + model.groups * 4 * (model.s_w + model.vector_bits) / 3


def cost_flat(variant: Variant, model: CostModel) -> float:
    """Expected bits per signature, global commitment and salt included."""
    R = model.rounds
    if variant is Variant.GENERIC:
        return cost_non_optimized(model)
    if variant is Variant.TREE:
        tree = replace(model, groups=R // ROUNDS_PER_GROUP)
        # the closed form leaves out the global commitment the verifier needs
        return cost_hash_tree(tree) + model.l_comm
    base = model.l_comm + R * (model.l_seed + model.l_comm + (model.s_w + model.vector_bits) / 3)
    return base + (model.l_salt if variant is Variant.SALTED else 0)


def cost_non_optimized(model: CostModel) -> float:
    """Full strings plus randomized-commitment nonces in every round."""
    nonce = 2 * model.l_seed
    z1 = model.permutation_bits + model.syndrome_bits
    per_round = (model.l_comm + 2 * nonce + (2 * model.vector_bits) / 3
                 + 2 * (z1 + model.vector_bits) / 3)
    return model.l_comm + model.rounds * per_round


def payload_bits(params: SchemeParams, tr: Transcript) -> float:
    """Information content of one signature under the costing above."""
    m = CostModel.from_params(params)
    total = params.l_comm + params.salt_bits
    if params.variant is Variant.GENERIC:
        for c in tr.challenges:
            z1 = m.permutation_bits + m.syndrome_bits
            strings = 2 * m.vector_bits if c == 1 else z1 + m.vector_bits
            total += params.l_comm + 4 * params.l_seed + strings
        return total
    vec = {1: m.s_w, 2: m.vector_bits, 3: 0.0}
    if params.variant is Variant.TREE:
        for unit in payload_units(params, tr.challenges):
            lv = group_leaves(unit)
            seeds = len(tree_cover(lv["perm_seeds"])) + len(tree_cover(lv["vec_seeds"]))
            comms = len(tree_cover(lv["first"])) + len(tree_cover(lv["second"])) + len(lv["third"])
            total += seeds * params.l_seed + comms * params.l_comm + sum(vec[c] for c in unit)
        return total
    for c in tr.challenges:
        total += params.l_seed + params.l_comm + vec[c]
    return total


def serialized_bytes(params: SchemeParams, challenges, header: bool = True) -> int:
    """Exact encoded length of a signature with these challenges."""
    from .fiatshamir import HEADER_BYTES

    units = payload_units(params, challenges)
    body = (nbytes(params.l_comm) + nbytes(params.salt_bits) + nbytes(2 * params.rounds)
            + sum(FRAMING_BYTES_PER_PAYLOAD + payload_length(params, u) for u in units))
    return body + (HEADER_BYTES if header else 0)


def framing_bytes(params: SchemeParams) -> int:
    """Header, packed challenges and length prefixes."""
    from .fiatshamir import HEADER_BYTES

    units = params.groups if params.variant is Variant.TREE else params.rounds
    return HEADER_BYTES + nbytes(2 * params.rounds) + FRAMING_BYTES_PER_PAYLOAD * units


# tables

def table_bits(version: str, model: CostModel) -> float:
    if version == "hash-tree":
        return cost_hash_tree(model)
    if version == "optimized":
        return cost_flat(Variant.SALTED, model)
    if version == "non-optimized":
        return cost_non_optimized(model)
    raise ValueError(f"unknown table version {version!r}")


def table_cells(cells, version: str = "hash-tree", l_seed: int = 128, l_comm: int = 256,
                l_salt: int = 256, groups: int = DEFAULT_GROUPS, rounds: int | None = None) -> list[dict]:
    """One entry per (metric, q); ``cells`` maps q to (n, k, w)."""
    if rounds is None:
        rounds = ROUNDS_PER_GROUP * groups
    out = []
    for kind in (WeightKind.HAMMING, WeightKind.LEE):
        for q in sorted(cells):
            n, k, w = cells[q]
            m = CostModel(n, k, w, q, kind, rounds, l_seed, l_comm, l_salt, groups)
            bits = table_bits(version, m)
            out.append({"version": version, "metric": kind.value, "q": q, "n": n, "k": k, "w": w,
                        "s_w": round(m.s_w, 6), "bits": round(bits, 6), "kB": round(bits / 8000, 6)})
    return out


def emit_tables(rows: list[dict], fmt: str = "text") -> str:
    """CSV, or text laid out with one row per metric and one column per q (kB = 1000 bytes)."""
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return buf.getvalue()
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    qs = sorted({r["q"] for r in rows})
    version = rows[0]["version"]
    label = {"hamming": "wt_H", "lee": "wt_L"}
    cells = {(r["metric"], r["q"]): f"{r['kB']:.4f} kB" for r in rows}
    width = max(12, *(len(v) for v in cells.values()))
    lines = [f"{VERSION_TITLES[version]}  (kB = 1000 bytes)",
             "q".ljust(6) + "".join(str(q).rjust(width + 2) for q in qs)]
    for metric in ("hamming", "lee"):
        lines.append(label[metric].ljust(6)
                     + "".join(cells[(metric, q)].rjust(width + 2) for q in qs))
    return "\n".join(lines) + "\n"
