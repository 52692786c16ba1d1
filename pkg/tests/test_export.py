import csv
import io
import json
from fractions import Fraction

from fracphi.export import FIELDS, records_csv, tree_records
from fracphi.rulegen import classify, generate
from fracphi.homogeneity import SKNumber

from conftest import S


def _rows():
    ts = generate(S, SKNumber())
    return tree_records(ts, classify(ts))


def test_fields_and_order():
    rows = _rows()
    assert all(list(r) == FIELDS for r in rows)
    values = [Fraction(r["value"]) for r in rows]
    assert values == sorted(values)


def test_cube_row():
    cube = next(r for r in _rows() if r["tree"] == "I(Xi)*I(Xi)*I(Xi)")
    assert cube["class"] == "W"
    assert cube["m"] == 0 and cube["leaves"] == 3 and cube["symmetry_factor"] == 6
    assert cube["value"] == "-9/5"
    assert cube["alpha"] == "1 - 10/3k"


def test_monomials_have_no_jet():
    ts = generate(S, SKNumber(0, 2, 0), max_poly_degree=1)
    rows = tree_records(ts)
    mono = [r for r in rows if r["tree"].startswith("X") and "Xi" not in r["tree"]]
    assert mono and all(r["upsilon"] == "" and r["alpha"] == "" for r in mono)


def test_csv_round_trip_and_determinism():
    a, b = records_csv(_rows()), records_csv(_rows())
    assert a == b
    parsed = list(csv.DictReader(io.StringIO(a)))
    assert [r["tree"] for r in parsed] == [r["tree"] for r in _rows()]


def test_treeset_json():
    ts = generate(S, SKNumber())
    payload = json.loads(ts.to_json())
    assert payload == json.loads(ts.to_json())
