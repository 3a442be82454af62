import json
import random
from fractions import Fraction

import pytest

from conftest import assert_valid
from segpack import generators
from segpack.errors import ContractError, DomainError
from segpack.harmonic import T_k, total_modified_volume
from segpack.model import Box3, Instance, total_volume
from segpack.oracle import exact_strip_opt
from segpack.ssp import (SspConfig, gnf_pack, gnfdh_pack, group_by_length,
                         realize_layers, run_3ssp)

F = Fraction


def boxes_of(sizes):
    return Instance.from_sizes(sizes).boxes


def test_config_domains():
    with pytest.raises(DomainError):
        SspConfig(k=1)
    with pytest.raises(DomainError):
        SspConfig(c=F(1))
    with pytest.raises(DomainError):
        SspConfig(backend="other")


def test_group_by_length_examples():
    inst = Instance.from_sizes([("0.9", "0.5", "0.5"), ("0.45", "0.5", "0.5"),
                                ("0.1", "0.5", "0.5")])
    groups = group_by_length(inst, 4)
    assert [b.id for b in groups[0]] == [0]
    assert [b.id for b in groups[1]] == [1]
    assert groups[2] == []
    assert [b.id for b in groups[3]] == [2]

    ones = Instance.from_sizes([(1, "0.5", "0.5")] * 3)
    groups = group_by_length(ones, 4)
    assert len(groups[0]) == 3

    half = Instance.from_sizes([("0.5", "0.5", "0.5")])
    groups = group_by_length(half, 3)
    assert [b.id for b in groups[1]] == [0]  # exactly 1/2 is class 2


def test_group_partition_and_sorting(rng):
    inst = generators.gen_uniform(150, seed=9)
    k = 7
    groups = group_by_length(inst, k)
    seen = sorted(b.id for g in groups for b in g)
    assert seen == list(range(150))
    for i, g in enumerate(groups, start=1):
        for b in g:
            if i < k:
                assert F(1, i + 1) < b.length <= F(1, i)
            else:
                assert b.length <= F(1, k)
        widths = [b.width for b in g]
        assert widths == sorted(widths, reverse=True)


def test_gnf_examples():
    # two items per slip, two slips -> four per segment
    group = boxes_of([("0.4", "0.5", "0.9")] * 8)
    segs = gnf_pack(list(group), 2, F(2))
    assert [len(s.boxes) for s in segs] == [4, 4]
    assert all(len(s.slips) == 2 for s in segs)

    single = boxes_of([("0.4", "0.7", "0.9")])
    segs = gnf_pack(list(single), 2, F(2))
    assert len(segs) == 1 and segs[0].width == F(7, 10)

    tall = boxes_of([("0.9", "0.3", 1)] * 7)
    segs = gnf_pack(list(tall), 1, F(3))
    assert [len(s.boxes) for s in segs] == [3, 3, 1]


def test_gnf_contract_error():
    group = boxes_of([("0.9", "0.5", "0.5")])
    with pytest.raises(ContractError):
        gnf_pack(list(group), 2, F(2))


def test_gnf_closed_slips_exceed_c_minus_1(rng):
    sizes = [("0.35", str(F(rng.randint(10, 99), 100)),
              str(F(rng.randint(10, 100), 100))) for _ in range(120)]
    group = sorted(boxes_of(sizes), key=lambda b: (-b.width, b.id))
    c = F(3)
    segs = gnf_pack(list(group), 2, c)
    for seg in segs[:-1]:
        for slip in seg.slips:
            assert sum((b.height for b in slip), F(0)) > c - 1


def test_gnfdh_examples():
    group = boxes_of([("0.1", "0.2", "0.5")] * 100)
    segs = gnfdh_pack(list(group), 10, F(2))
    assert [len(s.boxes) for s in segs] == [40, 40, 20]
    assert all(len(lv.boxes) == 10 for s in segs for lv in s.levels)

    one = boxes_of([("0.05", "0.3", "0.4")])
    segs = gnfdh_pack(list(one), 10, F(2))
    assert len(segs) == 1 and len(segs[0].levels) == 1


def test_gnfdh_maximality_and_closure(rng):
    k, c = 5, F(3)
    sizes = [(str(F(rng.randint(1, 20), 100)),
              str(F(rng.randint(10, 99), 100)),
              str(F(rng.randint(10, 100), 100))) for _ in range(150)]
    group = sorted(boxes_of(sizes), key=lambda b: (-b.width, b.id))
    segs = gnfdh_pack(list(group), k, c)
    assert sorted(b.id for s in segs for b in s.boxes) \
        == sorted(b.id for b in group)
    pos = 0
    for si, seg in enumerate(segs):
        taken = len(seg.boxes)
        heights = [lv.height for lv in seg.levels]
        assert sum(heights, F(0)) <= c
        assert heights == sorted(heights, reverse=True)
        # closed levels are length-full; only the last may be short
        for lv in seg.levels[:-1]:
            assert lv.used_length > 1 - F(1, k)
        if si < len(segs) - 1:
            # adding the next box must overflow the segment height
            from segpack.ssp import _nfdh_fits
            ok, _ = _nfdh_fits(group[pos:pos + taken + 1], c)
            assert not ok
            assert sum(heights, F(0)) > c - 1
        pos += taken


def test_gnfdh_contract_error():
    group = boxes_of([("0.5", "0.5", "0.5")])
    with pytest.raises(ContractError):
        gnfdh_pack(list(group), 10, F(2))


def test_realize_layers_geometry():
    group = boxes_of([("0.4", "0.5", "0.9")] * 8)
    segs = gnf_pack(list(group), 2, F(2))
    widths = [s.width for s in segs]
    bins = [[0], [1]]
    placements = realize_layers(segs, bins, F(2))
    inst = Instance(tuple(group))
    from segpack.model import Packing
    packing = Packing.of(inst, placements)
    assert_valid(inst, packing)
    assert segs[0].layer == 0 and segs[1].layer == 1
    # slips sit at x = 0 and x = 1/2
    xs = sorted({p.x for p in placements})
    assert xs == [0, F(1, 2)]


def test_realize_overflow_contract():
    group = boxes_of([("0.4", "0.8", "0.9")] * 8)
    segs = gnf_pack(list(group), 2, F(2))
    with pytest.raises(ContractError):
        realize_layers(segs, [[0, 1]], F(2))


def test_run_3ssp_cube_column():
    # all boxes have full base: one slip per segment, one segment per layer
    heights = [F(rng_h, 10) for rng_h in (9, 7, 10, 3, 8, 6, 10, 5)]
    inst = Instance.from_sizes([(1, 1, h) for h in heights])
    cfg = SspConfig(k=4, c=F(3))
    res = run_3ssp(inst, cfg)
    assert_valid(inst, res.packing)
    total_h = sum(heights, F(0))
    assert res.certificate.height <= cfg.c / (cfg.c - 1) * total_h + cfg.c


def test_run_3ssp_empty():
    res = run_3ssp(Instance.from_sizes([]))
    assert res.certificate.height == 0
    assert res.packing.placements == ()
    assert res.certificate.total_weight == 0
    assert all(g == 0 for g in res.certificate.group_weights)


def test_run_3ssp_certificate_structure(rng):
    inst = generators.gen_uniform(120, seed=3)
    cfg = SspConfig(k=6, c=F(4))
    res = run_3ssp(inst, cfg)
    assert_valid(inst, res.packing)
    cert = res.certificate

    # segment widths nonincreasing per class, and so are their step values
    for per_type in res.segments_by_type:
        widths = [s.width for s in per_type]
        assert widths == sorted(widths, reverse=True)
        gs = [res.g(w) for w in widths]
        assert gs == sorted(gs, reverse=True)

    # aggregate slack and the per-segment inequalities
    assert cert.slack > 0
    assert all(ch.slack >= 0 for ch in res.segment_checks)

    # the group weights reproduce the relaxation value through duality
    sum_g = sum(cert.group_weights, F(0))
    assert float(sum_g) == pytest.approx(cert.fbp_objective, rel=1e-6)
    # and the aggregate inequality chains to the relaxation bound
    c = cfg.c
    assert c * sum_g <= c * (cert.total_weight + c * cfg.k) / (c - 1)

    # certificate JSON carries the documented keys
    doc = cert.to_json_dict()
    for key in ("height", "lb_volume", "lb_modified", "W", "G", "fbp",
                "lemma6_slack", "config"):
        assert key in doc
    json.dumps(doc)


def test_run_3ssp_aptas_backend():
    inst = generators.gen_uniform(80, seed=5)
    res = run_3ssp(inst, SspConfig(k=4, c=F(3), backend="aptas"))
    assert_valid(inst, res.packing)


def test_weight_bound_against_oracle(rng):
    # tiny instances: weighted volume is below T_k times the exact optimum,
    # and the heuristic never beats the optimum
    for trial in range(12):
        n = rng.randint(1, 4)
        sizes = [(F(rng.randint(2, 10), 10), F(rng.randint(2, 10), 10),
                  F(rng.randint(2, 10), 10)) for _ in range(n)]
        inst = Instance.from_sizes(sizes)
        opt, witness = exact_strip_opt(inst)
        assert_valid(inst, witness)
        cfg = SspConfig(k=4, c=F(3))
        res = run_3ssp(inst, cfg)
        assert_valid(inst, res.packing)
        W = res.certificate.total_weight
        assert W <= T_k(cfg.k) * opt          # exact rational comparison
        assert res.packing.height >= opt
        assert res.certificate.lower_bound <= opt


def test_parametric_row_switches():
    inst = Instance.from_sizes([("0.3", "0.9", "0.5"), ("0.2", "0.8", "0.5")])
    res = run_3ssp(inst, SspConfig(k=4, c=F(3)))
    row = res.certificate.parametric
    assert row is not None
    assert row["asymptotic_ratio"] == 1.302  # alpha = max length = 0.3
    inst = Instance.from_sizes([("0.9", "0.9", "0.5")])
    res = run_3ssp(inst, SspConfig(k=4, c=F(3)))
    assert res.certificate.parametric["asymptotic_ratio"] == 1.691
