import json

import pytest

from matchbox.errors import MatchboxError
from matchbox.io import (SHIPPED, dumps_json, load_spec, parse_clopen, parse_dot, roundtrip, spec_from_dict,
                         spec_to_dict, write_atomic)
from matchbox.pipeline import artifacts, run
from matchbox.systems import OdometerSpec, SubstitutionRule


@pytest.mark.parametrize("name", SHIPPED)
def test_shipped_specs_roundtrip(name):
    spec = load_spec(name)
    again = spec_from_dict(json.loads(dumps_json(spec_to_dict(spec))))
    assert spec_to_dict(again) == spec_to_dict(spec)


def test_spec_file(tmp_path):
    p = tmp_path / "s.json"
    p.write_text(json.dumps({"kind": "substitution", "rules": {"a": "ab", "b": "a"}, "lengths": {"a": "2", "b": "1"}}))
    spec = load_spec(str(p))
    assert isinstance(spec, SubstitutionRule) and spec_to_dict(spec)["lengths"] == {"a": "2", "b": "1"}
    assert isinstance(load_spec({"kind": "odometer", "chain": [2, 4]}), OdometerSpec)


@pytest.mark.parametrize("bad", [[1], {"kind": "x"}, {"kind": "substitution", "rules": {}},
                                 {"kind": "odometer", "chain": []},
                                 {"kind": "substitution", "rules": {"a": "ab", "b": "a"}, "alphabet": ["a"]}])
def test_bad_spec_dicts(bad):
    with pytest.raises(MatchboxError) as e:
        spec_from_dict(bad)
    assert e.value.code == "BAD_SPEC"


def test_missing_and_invalid_files(tmp_path):
    with pytest.raises(MatchboxError) as e:
        load_spec(str(tmp_path / "nope.json"))
    assert e.value.code == "BAD_SPEC"
    p = tmp_path / "broken.json"
    p.write_text("{")
    with pytest.raises(MatchboxError) as e:
        load_spec(str(p))
    assert e.value.code == "BAD_SPEC"


def test_parse_clopen(fib):
    assert parse_clopen(fib, "X").render() == "{[]}"
    assert parse_clopen(fib, "{}").is_empty()
    assert parse_clopen(fib, "{[aa], [ab]}").render() == "{[a]}"


@pytest.mark.parametrize("name,emit", [("fibonacci", ("dot", "json", "csv")), ("dyadic", ("dot", "json", "csv")),
                                       ("z2", ("json", "csv"))])
def test_artifacts_roundtrip(tmp_path, name, emit):
    res = run(name, 3)
    files = artifacts(res, emit)
    assert "hierarchy.txt" in files
    for fname, text in files.items():
        write_atomic(tmp_path / fname, text)
        assert roundtrip(tmp_path / fname), fname


def test_dot_format(tmp_path):
    files = artifacts(run("fibonacci", 2), ("dot",))
    g = parse_dot(files["M1_simplified.dot"])
    assert g["name"] == "M1s" and g["vertices"] == [0]
    assert sorted(e["length"] for e in g["edges"]) == ["1", "2"]
    with pytest.raises(MatchboxError):
        parse_dot("graph x {\n}\n")


def test_csv_format():
    text = artifacts(run("fibonacci", 3), ("csv",))["matrices.csv"]
    lines = text.splitlines()
    assert lines[0] == "source_level,target_level,row,col,value"
    assert "2,1,0,0,1" in lines and "2,1,1,1,0" in lines


def test_write_atomic_replaces(tmp_path):
    p = tmp_path / "sub" / "f.txt"
    write_atomic(p, "one\n")
    write_atomic(p, "two\n")
    assert p.read_text() == "two\n"
    assert [x.name for x in p.parent.iterdir()] == ["f.txt"]
