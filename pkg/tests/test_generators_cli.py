import json
from fractions import Fraction
from pathlib import Path

import pytest

from conftest import assert_valid
from segpack import generators
from segpack.cli import main
from segpack.errors import DomainError
from segpack.model import (instance_from_json, instance_to_json,
                           packing_from_json, total_volume)

F = Fraction


def test_same_seed_same_instance():
    a = generators.gen_uniform(30, seed=123)
    b = generators.gen_uniform(30, seed=123)
    assert a.boxes == b.boxes
    c = generators.gen_uniform(30, seed=124)
    assert a.boxes != c.boxes


def test_uniform_bounds():
    inst = generators.gen_uniform(100, seed=1, lo="1/4", hi="3/4")
    for b in inst.boxes:
        for v in (b.length, b.width, b.height):
            assert F(1, 4) <= v <= F(3, 4)


def test_square_base_generator():
    inst = generators.gen_square_base(50, seed=2)
    assert inst.square_base


def test_harmonic_adversarial_lengths():
    k = 6
    inst = generators.gen_harmonic_adversarial(200, seed=3, k=k)
    for b in inst.boxes:
        t = int(F(1) / b.length)
        t = min(t, k)
        if t < k:
            assert F(1, t + 1) < b.length <= F(1, t)


def test_guillotine_volume_equals_height():
    for seed in range(5):
        inst = generators.gen_guillotine(3, 20, seed=seed)
        assert total_volume(inst) == 3
        assert inst.meta["opt_height"] == "3"
        assert all(b.length <= 1 and b.width <= 1 and b.height <= 1
                   for b in inst.boxes)


def test_gen_empty_uniform():
    inst = generators.gen_uniform(0, seed=0)
    assert len(inst) == 0


def test_unknown_generator():
    with pytest.raises(DomainError):
        generators.gen_instance("nope", seed=0)


def test_instance_json_identity():
    inst = generators.gen_guillotine(2, 15, seed=9)
    again = instance_from_json(instance_to_json(inst))
    assert again.boxes == inst.boxes
    assert again.meta == inst.meta


# ------------------------------------------------------------------- CLI

def run_cli(*argv):
    return main(list(argv))


def test_cli_round_trip(tmp_path):
    inst_path = tmp_path / "inst.json"
    pack_path = tmp_path / "pack.json"
    cert_path = tmp_path / "cert.json"
    assert run_cli("gen", "--generator", "guillotine-cut", "--height", "2",
                   "--cuts", "12", "--seed", "4", "--out", str(inst_path)) == 0
    assert run_cli("solve", "--instance", str(inst_path), "--out",
                   str(pack_path), "--k", "4", "--c", "3") == 0
    assert run_cli("certify", "--instance", str(inst_path), "--out",
                   str(cert_path), "--k", "4", "--c", "3") == 0

    inst = instance_from_json(inst_path.read_text())
    packing = packing_from_json(pack_path.read_text())
    assert_valid(inst, packing)

    cert = json.loads(cert_path.read_text())
    for key in ("height", "lb_volume", "lb_modified", "W", "G", "fbp",
                "lemma6_slack", "config", "packing"):
        assert key in cert
    assert cert["lemma6_slack"] > 0

    out_dir = tmp_path / "exports"
    assert run_cli("export", "--instance", str(inst_path), "--packing",
                   str(pack_path), "--out-dir", str(out_dir),
                   "--layer-height", "3") == 0
    svgs = sorted(out_dir.glob("layer*.svg"))
    assert svgs
    text = svgs[0].read_text()
    assert 'viewBox="0 0 1000 1000"' in text and "<rect" in text
    obj = (out_dir / "packing.obj").read_text()
    assert obj.count("v ") == 8 * len(inst)
    assert obj.count("f ") == 6 * len(inst)


def test_cli_oracle(tmp_path):
    inst_path = tmp_path / "tiny.json"
    inst_path.write_text(json.dumps({
        "boxes": [{"l": "0.6", "w": "0.6", "h": "0.5"},
                  {"l": "0.6", "w": "0.6", "h": "0.5"}]}))
    wit_path = tmp_path / "wit.json"
    assert run_cli("oracle", "--instance", str(inst_path), "--out",
                   str(wit_path)) == 0
    packing = packing_from_json(wit_path.read_text())
    assert packing.height == 1


def test_cli_exit_codes(tmp_path):
    # missing file: I/O error
    assert run_cli("solve", "--instance", str(tmp_path / "none.json")) == 2
    # malformed instance: I/O error
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run_cli("solve", "--instance", str(bad)) == 2
    # refusal: oracle on too many boxes
    many = tmp_path / "many.json"
    many.write_text(json.dumps({
        "boxes": [{"l": "0.5", "w": "0.5", "h": "0.5"}] * 7}))
    assert run_cli("oracle", "--instance", str(many)) == 1
    # bad domain value: usage error
    ok = tmp_path / "ok.json"
    ok.write_text(json.dumps({"boxes": [{"l": "0.5", "w": "0.5", "h": "0.5"}]}))
    assert run_cli("solve", "--instance", str(ok), "--c", "1") == 1
    # no instance given
    assert run_cli("solve") == 1


def test_cli_square_aptas_and_mnfdh(tmp_path):
    inst_path = tmp_path / "sq.json"
    inst = generators.gen_square_base(10, seed=6, lo="2/5", hi="4/5")
    inst_path.write_text(instance_to_json(inst))
    out = tmp_path / "sq_pack.json"
    assert run_cli("solve", "--instance", str(inst_path), "--algorithm",
                   "square-aptas", "--epsilon", "1/12",
                   "--out", str(out)) == 0
    packing = packing_from_json(out.read_text())
    assert_valid(inst, packing)
    assert run_cli("solve", "--instance", str(inst_path), "--algorithm",
                   "mnfdh", "--out", str(out)) == 0
    packing = packing_from_json(out.read_text())
    assert_valid(inst, packing)


def test_cli_glob_batch(tmp_path):
    for i in range(3):
        p = tmp_path / f"g{i}.json"
        inst = generators.gen_uniform(12, seed=i)
        p.write_text(instance_to_json(inst))
    out_dir = tmp_path / "packs"
    out_dir.mkdir()
    assert run_cli("solve", "--glob", str(tmp_path / "g*.json"), "--k", "4",
                   "--c", "3", "--jobs", "2", "--out", str(out_dir)) == 0
    assert len(list(out_dir.glob("*.packing.json"))) == 3
