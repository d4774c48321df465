from __future__ import annotations

import csv
import json

import pytest

from crepantia.cli import FanDocument, GroupSpec, SpecError, cyclic_types, main, parse_pair
from crepantia.lattice import make_proper_fraction as F


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_hj_table(capsys):
    code, out, _ = run(capsys, "hj", "11/8")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "[2,2,3,2]"
    assert len(lines) == 5
    assert "1/11(1,8)" in lines[1] and "-2" in lines[1]
    assert "1/11(3,2)" in lines[3] and "-3" in lines[3]


def test_hj_errors(capsys):
    assert run(capsys, "hj", "5/1")[1].splitlines()[0] == "[5]"
    assert run(capsys, "hj", "11/22")[0] == 3
    assert run(capsys, "hj", "11x")[0] == 2


def test_rpoly(capsys):
    code, out, _ = run(capsys, "rpoly", "1/11(1,2,8)")
    assert code == 0
    assert out.splitlines() == [
        "1: 1/11(1,2,8)", "x2: 1/2(1,1,0)", "x3: 1/8(1,2,5)", "x3x2: 1/2(1,0,1)",
        "x3x3: 1/5(1,2,2)", "x3x3x2: 1/2(1,1,0)", "x3x3x3: 1/2(1,0,1)",
    ]
    code, out, _ = run(capsys, "rpoly", "1/2(1,1,0)")
    assert out.splitlines() == ["1: 1/2(1,1,0)"]


def test_zpoly(capsys):
    code, out, _ = run(capsys, "zpoly", "1/11(1,2,8)")
    assert code == 0
    assert out.splitlines() == ["x2: (0,-6,4)", "x3: (0,0,-2)", "x3x2: (0,-4,2)",
                                "x3x3: (0,0,-2)", "x3x3x2: (0,-3,1)", "x3x3x3: (0,1,-3)"]


def test_poly_needs_unit_entry(capsys):
    assert run(capsys, "rpoly", "1/6(2,3,4,3)")[0] == 3
    assert run(capsys, "zpoly", "1/6(2,3,4,3)")[0] == 3
    assert run(capsys, "rpoly", "1/11(1,2")[0] == 2


def test_resolve_cyclic(capsys, tmp_path):
    out_json = tmp_path / "fan.json"
    code, out, _ = run(capsys, "resolve", "1/15(1,2,4,8)", "--out", str(out_json))
    assert code == 0
    assert "cones: 15" in out and "crepant: yes" in out and "smooth: yes" in out
    doc = FanDocument.from_json(out_json.read_text())
    assert len(doc.cones) == 15 and doc.crepant


def test_resolve_small_and_iterated(capsys):
    code, out, _ = run(capsys, "resolve", "1/2(1,1)")
    assert code == 0 and "cones: 2" in out
    code, out, _ = run(capsys, "resolve", "1/4(1,3,0);1/4(1,0,3)", "--iterated")
    assert code == 0 and "cones: 16" in out and "crepant: yes" in out
    assert run(capsys, "resolve", "1/4(1,3,0);1/4(1,0,3)")[0] == 3


def test_resolve_semi_unimodularity_lost(capsys):
    code, _, err = run(capsys, "resolve", "1/6(2,3,0,1);1/6(1,3,2,0)", "--iterated",
                       "--chain", "1/6(2,3,0,1);1/6(1,3,2,0)")
    assert code == 4
    assert "error" in err


def test_resource_cap(capsys, monkeypatch):
    monkeypatch.setenv("CREPANTIA_MAX_CONES", "10")
    assert run(capsys, "resolve", "1/39(1,5,8,25)")[0] == 5


@pytest.mark.parametrize("spec,code", [
    ("1/15(1,6,4,4)", 10),
    ("1/24(1,5,6,12)", 11),
    ("1/7(1,2,4)", 0),
    ("1/39(1,5,8,25)", 10),
    ("1/7(1,2,5)", 3),
    ("1/4(1,3,0);1/4(1,0,3)", 0),
])
def test_check_exit_codes(capsys, spec, code):
    assert run(capsys, "check", spec)[0] == code


def test_check_witness_text(capsys):
    _, out, _ = run(capsys, "check", "1/15(1,6,4,4)")
    assert "x2: 1/6(1,3,4,4) age 2" in out
    _, out, _ = run(capsys, "check", "1/24(1,5,6,12)")
    assert "x2x4: 1/2(1,1,1,1)" in out


def test_verify_round_trip(capsys, tmp_path):
    path = tmp_path / "fan.json"
    assert run(capsys, "resolve", "1/11(1,2,8)", "--out", str(path))[0] == 0
    text = path.read_text()
    assert FanDocument.from_json(text).to_json() == text
    code, out, _ = run(capsys, "verify", str(path))
    assert code == 0 and out.startswith("ok: 11 cones")


def test_verify_non_crepant_document(capsys, tmp_path):
    path = tmp_path / "fan.json"
    run(capsys, "resolve", "1/24(1,5,6,12)", "--out", str(path))
    assert run(capsys, "verify", str(path))[0] == 0


def test_verify_edited_ray(capsys, tmp_path):
    path = tmp_path / "fan.json"
    run(capsys, "resolve", "1/11(1,2,8)", "--out", str(path))
    data = json.loads(path.read_text())
    # double the first exceptional ray: age 2, no longer primitive
    k = next(i for i, d in enumerate(data["discrepancies"]) if d is not None)
    data["rays"][k]["numerators"] = [str(2 * int(a)) for a in data["rays"][k]["numerators"]]
    path.write_text(json.dumps(data))
    code, out, _ = run(capsys, "verify", str(path))
    assert code == 1
    assert "FAIL" in out


def test_verify_flipped_crepant_flag(capsys, tmp_path):
    path = tmp_path / "fan.json"
    run(capsys, "resolve", "1/11(1,2,8)", "--out", str(path))
    data = json.loads(path.read_text())
    data["crepant"] = False
    path.write_text(json.dumps(data))
    code, out, _ = run(capsys, "verify", str(path))
    assert code == 1 and "crepancy failure" in out


def test_verify_malformed(capsys, tmp_path):
    path = tmp_path / "fan.json"
    run(capsys, "resolve", "1/11(1,2,8)", "--out", str(path))
    text = path.read_text()
    path.write_text(text[: len(text) // 2])
    assert run(capsys, "verify", str(path))[0] == 2
    assert run(capsys, "verify", str(tmp_path / "missing.json"))[0] == 2
    path.write_text(json.dumps({"schema": "other/9"}))
    assert run(capsys, "verify", str(path))[0] == 2


def test_svg_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    run(capsys, "resolve", "1/7(1,2,4)", "--svg", str(a))
    run(capsys, "resolve", "1/7(1,2,4)", "--svg", str(b))
    assert a.read_text() == b.read_text()
    assert a.read_text().count("<polygon") == 7
    assert a.read_text().startswith("<svg")


def test_svg_marks_discrepancy(capsys, tmp_path):
    path = tmp_path / "e.svg"
    run(capsys, "resolve", "1/7(1,2,5)", "--svg", str(path))
    assert path.read_text().count('fill="red"') == 6


def test_sweep_dim2(capsys, tmp_path):
    report = tmp_path / "s.csv"
    assert run(capsys, "sweep", "--dim", "2", "--max-order", "20", "--report", str(report))[0] == 0
    rows = list(csv.DictReader(report.open()))
    assert len(rows) == 19
    assert all(r["verdict"] == "crepant" for r in rows)
    assert list(rows[0]) == ["spec", "order", "dim", "verdict", "witness", "cones", "max_discrepancy"]


def test_sweep_parallel_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(capsys, "sweep", "--dim", "3", "--max-order", "12", "--report", str(a))
    run(capsys, "sweep", "--dim", "3", "--max-order", "12", "--report", str(b), "--jobs", "2")
    assert a.read_text() == b.read_text()


def test_sweep_dim4_marks_obstruction(capsys, tmp_path):
    report = tmp_path / "s.csv"
    run(capsys, "sweep", "--dim", "4", "--max-order", "15", "--report", str(report))
    rows = {r["spec"]: r for r in csv.DictReader(report.open())}
    # 1/15(1,6,4,4) is listed by its sorted representative
    row = rows["1/15(1,1,4,9)"]
    assert row["verdict"] == "obstructed"
    assert "age 2" in row["witness"]


def test_sweep_bad_args(capsys):
    assert run(capsys, "sweep", "--dim", "6", "--max-order", "5")[0] == 3
    assert run(capsys, "sweep", "--dim", "3", "--max-order", "600")[0] == 3


def test_cyclic_types_classes():
    types = cyclic_types(3, 7)
    assert F((1, 2, 4), 7) in types or F((1, 2, 4), 7) in {F(t.numerators, 7) for t in types}
    assert len(types) == len(set(types))
    assert all(t.age == 1 for t in types)


def test_group_spec_round_trip():
    for text in ("1/11(1,2,8)", "1/4(1,3,0);1/4(1,0,3)", "1/2(1,1)"):
        assert str(GroupSpec.parse(text)) == text
    assert str(GroupSpec.parse(" +1/11( 1, 2, 8 ) ")) == "1/11(1,2,8)"
    assert str(GroupSpec.parse("1/11(-10,2,8)")) == "1/11(1,2,8)"
    for bad in ("1/0(1,2)", "11(1,2)", "1/11(1,2);1/3(1,1,1)", "1/9223372036854775808(1,1)", ""):
        with pytest.raises(SpecError):
            GroupSpec.parse(bad)


def test_parse_pair():
    assert parse_pair("11/8") == (11, 8)
    assert parse_pair("+11/+8") == (11, 8)
    with pytest.raises(SpecError):
        parse_pair("11/-8")
