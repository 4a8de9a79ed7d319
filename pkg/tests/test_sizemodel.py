import itertools
import math
import random
from fractions import Fraction

import pytest

from conftest import desk_params, keypair_for
from sternlab.algebra import WeightKind
from sternlab.fiatshamir import encode_signature, sign
from sternlab.protocol import Variant
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
    cost_hash_tree,
    emit_tables,
    payload_bits,
    serialized_bytes,
    table_cells,
)


def cover_size(leaves):
    """Independent count of tree nodes needed to reveal ``leaves`` of a 4-leaf tree."""
    if len(leaves) == 4:
        return 1
    pairs = [{0, 1}, {2, 3}]
    return sum(1 if p <= leaves else len(p & leaves) for p in pairs)


def test_c1_identity_by_independent_enumeration():
    seeds = comms = Fraction(0)
    for cs in itertools.product((1, 2, 3), repeat=4):
        perm = {i for i, c in enumerate(cs) if c != 1}
        first = {i for i, c in enumerate(cs) if c == 1}
        seeds += cover_size(perm)
        comms += cover_size(first)
    assert (seeds / 81, comms / 81) == (C1_SEED, C1_COMM) == (Fraction(128, 81), Fraction(89, 81))
    assert c1_by_enumeration(1) == c1_by_enumeration(2) == (C1_SEED, C1_COMM)
    assert c1_bits(128, 256) == Fraction(128 * 128 + 89 * 256, 81)


def sphere_log2_by_polynomial(n, q, w, kind):
    per_symbol = [0] * (q // 2 + 1 if kind is WeightKind.LEE else 2)
    for a in range(q):
        per_symbol[kind.distance(a, q)] += 1
    poly = [1]
    for _ in range(n):
        out = [0] * min(len(poly) + len(per_symbol) - 1, w + 1)
        for i, x in enumerate(poly):
            for d, m in enumerate(per_symbol):
                if i + d <= w:
                    out[i + d] += x * m
        poly = out
    return math.log2(poly[w])


def test_hash_tree_cost_matches_hand_formula():
    m = CostModel(300, 150, 60, 5, WeightKind.LEE)
    s_w = sphere_log2_by_polynomial(300, 5, 60, WeightKind.LEE)
    assert m.s_w == pytest.approx(s_w, rel=1e-12)
    expect = 256 + 55 * (2 * (128 * 128 / 81 + 89 * 256 / 81) + 4 * (s_w + 300 * math.log2(5) + 256) / 3)
    assert cost_hash_tree(m) == pytest.approx(expect, rel=1e-12)


@pytest.mark.parametrize("variant", list(Variant))
def test_encoded_length_matches_prediction(variant):
    rng = random.Random(3)
    params = desk_params(variant, 3, rounds=8)
    kp = keypair_for(params, rng)
    for _ in range(5):
        sig = sign(params, b"m", kp, rng)
        assert len(encode_signature(params, sig)) == serialized_bytes(params, sig.challenges)


@pytest.mark.parametrize("variant", list(Variant))
def test_payload_mean_near_analytic(variant):
    rng = random.Random(4)
    params = desk_params(variant, 5, WeightKind.LEE, rounds=40)
    kp = keypair_for(params, rng)
    bits = [payload_bits(params, sign(params, b"%d" % i, kp, rng)) for i in range(150)]
    analytic = cost_flat(variant, CostModel.from_params(params))
    assert abs(sum(bits) / len(bits) - analytic) / analytic < 0.02


def test_table_shape_and_ordering():
    for version in VERSIONS:
        rows = table_cells(PRESET_CELLS, version)
        assert [(r["metric"], r["q"]) for r in rows] == \
            [(m, q) for m in ("hamming", "lee") for q in TABLE_QS]
        by = {(r["metric"], r["q"]): r["bits"] for r in rows}
        for q in (2, 3):
            assert by[("hamming", q)] == by[("lee", q)]
        if version != "non-optimized":
            for q in (5, 7, 13):
                assert by[("lee", q)] <= by[("hamming", q)]


def test_text_and_csv_output():
    rows = table_cells(PRESET_CELLS, "hash-tree")
    text = emit_tables(rows, "text")
    lines = text.splitlines()
    assert "kB = 1000 bytes" in lines[0]
    assert lines[1].split() == ["q", "2", "3", "5", "7", "13"]
    assert lines[2].startswith("wt_H") and lines[3].startswith("wt_L")
    assert all(cell.endswith("kB") for cell in lines[2].split("  ") if "." in cell)
    csv = emit_tables(rows, "csv").splitlines()
    assert csv[0] == "version,metric,q,n,k,w,s_w,bits,kB" and len(csv) == 11
    with pytest.raises(ValueError):
        emit_tables(rows, "xml")


def test_kilobytes_are_decimal():
    row = table_cells({5: (300, 150, 60)}, "optimized")[0]
    assert row["kB"] == pytest.approx(row["bits"] / 8000, abs=1e-6)
