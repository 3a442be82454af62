import random
from fractions import Fraction

import pytest

from segpack.errors import DomainError, StructureError
from segpack.model import (Box3, Instance, Packing, Placement, as_fraction,
                           instance_from_json, instance_to_json,
                           packing_from_json, packing_height, packing_to_json,
                           total_volume, validate_packing)

F = Fraction


def place(instance, triples):
    return Packing.of(instance, [Placement(i, F(x), F(y), F(z))
                                 for i, (x, y, z) in enumerate(triples)])


def test_as_fraction_forms():
    assert as_fraction("3/5") == F(3, 5)
    assert as_fraction("0.5") == F(1, 2)
    assert as_fraction(1) == 1
    assert as_fraction(0.25) == F(1, 4)
    with pytest.raises(DomainError):
        as_fraction("abc")


def test_box_domain():
    with pytest.raises(DomainError):
        Box3(F(0), F(1, 2), F(1, 2), 0)
    with pytest.raises(DomainError):
        Box3(F(1, 2), F(3, 2), F(1, 2), 0)


def test_single_box_ok():
    inst = Instance.from_sizes([("0.5", "0.5", "0.5")])
    packing = place(inst, [(0, 0, 0)])
    report = validate_packing(inst, packing)
    assert report.ok
    assert packing.height == F(1, 2)


def test_two_boxes_overlap_on_x():
    inst = Instance.from_sizes([("0.6", "0.6", "0.5")] * 2)
    packing = place(inst, [(0, 0, 0), ("0.3", 0, 0)])
    report = validate_packing(inst, packing)
    assert not report.ok
    kinds = {v.kind for v in report.violations}
    assert kinds == {"overlap"}
    assert report.violations[0].box_ids == (0, 1)


def test_out_of_bounds():
    inst = Instance.from_sizes([("0.6", "0.6", "0.5")])
    packing = place(inst, [("0.5", 0, 0)])
    report = validate_packing(inst, packing)
    assert not report.ok
    assert report.violations[0].kind == "out_of_bounds"


def test_structural_errors():
    inst = Instance.from_sizes([("0.5", "0.5", "0.5")] * 2)
    with pytest.raises(StructureError):
        validate_packing(inst, Packing((Placement(5, F(0), F(0), F(0)),), F(1)))
    with pytest.raises(StructureError):
        validate_packing(inst, Packing((Placement(0, F(0), F(0), F(0)),), F(1)))
    dup = (Placement(0, F(0), F(0), F(0)),
           Placement(0, F(0), F(0), F(1, 2)),
           Placement(1, F(1, 2), F(0), F(0)))
    with pytest.raises(StructureError):
        validate_packing(inst, Packing(dup, F(1)))


def test_face_sharing_is_allowed():
    inst = Instance.from_sizes([("0.5", "0.5", "0.5")] * 4)
    packing = place(inst, [(0, 0, 0), ("0.5", 0, 0), (0, "0.5", 0),
                           ("0.5", "0.5", 0)])
    assert validate_packing(inst, packing).ok


def test_heights():
    inst = Instance.from_sizes([("0.3", "0.3", "0.5"), ("0.3", "0.3", "0.4")])
    stacked = place(inst, [(0, 0, 0), (0, 0, "0.5")])
    assert packing_height(inst, stacked) == F(9, 10)
    side = place(inst, [(0, 0, 0), ("0.5", 0, 0)])
    assert packing_height(inst, side) == F(1, 2)
    assert packing_height(inst, []) == 0


def test_height_mismatch_reported():
    inst = Instance.from_sizes([("0.5", "0.5", "0.5")])
    bad = Packing((Placement(0, F(0), F(0), F(0)),), F(2))
    report = validate_packing(inst, bad)
    assert any(v.kind == "height_mismatch" for v in report.violations)


def test_total_volume():
    assert total_volume(Instance.from_sizes([(1, 1, "0.5")])) == F(1, 2)
    assert total_volume(Instance.from_sizes([("0.5", "0.5", "0.5")] * 2)) == F(1, 4)
    assert total_volume(Instance.from_sizes([])) == 0


def test_validation_stable_under_permutation(rng):
    inst = Instance.from_sizes([("0.5", "0.5", "0.3")] * 4)
    placements = [Placement(0, F(0), F(0), F(0)),
                  Placement(1, F(1, 2), F(0), F(0)),
                  Placement(2, F(0), F(1, 2), F(0)),
                  Placement(3, F(1, 4), F(1, 4), F(0))]  # overlaps all
    for _ in range(10):
        rng.shuffle(placements)
        packing = Packing(tuple(placements), F(3, 10))
        report = validate_packing(inst, packing)
        assert not report.ok
        pairs = sorted(v.box_ids for v in report.violations)
        assert pairs == [(0, 3), (1, 3), (2, 3)]


def test_float_tolerance_path():
    inst = Instance.from_sizes([("1/3", "1/3", "1/3")] * 2)
    # second box placed via a float 1/3 that is slightly below the exact value
    packing = Packing((Placement(0, F(0), F(0), F(0)),
                       Placement(1, F(1) / 3 - F(1, 10 ** 12), F(0), F(0))),
                      F(1, 3))
    assert not validate_packing(inst, packing).ok
    assert validate_packing(inst, packing, tol=1e-9).ok


def test_json_round_trip():
    inst = Instance.from_sizes([("3/5", "0.5", "0.25"), ("1/3", "1/7", "1")],
                               meta={"note": "x"})
    again = instance_from_json(instance_to_json(inst))
    assert again.boxes == inst.boxes
    assert again.meta == inst.meta
    packing = place(inst, [(0, 0, 0), ("3/5", 0, 0)])
    back = packing_from_json(packing_to_json(packing))
    assert back == packing


def test_volume_bound_on_random_valid_packings(rng):
    # stack random boxes in one column: always valid, height >= volume
    for _ in range(50):
        n = rng.randint(1, 8)
        sizes = [(F(rng.randint(1, 10), 10), F(rng.randint(1, 10), 10),
                  F(rng.randint(1, 10), 10)) for _ in range(n)]
        inst = Instance.from_sizes(sizes)
        z = F(0)
        placements = []
        for b in inst.boxes:
            placements.append(Placement(b.id, F(0), F(0), z))
            z += b.height
        packing = Packing.of(inst, placements)
        assert validate_packing(inst, packing).ok
        assert packing.height >= total_volume(inst)
