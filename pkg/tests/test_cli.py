import json

import pytest

from fracphi.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_enumerate_json(capsys):
    code, out, _ = run(capsys, "enumerate", "--s", "9/10", "--cutoff", "0")
    assert code == 0
    payload = json.loads(out)
    assert payload["schema"] == 1 and payload["s"] == "9/10"
    cube = next(r for r in payload["trees"] if r["tree"] == "I(Xi)*I(Xi)*I(Xi)")
    assert cube["class"] == "W"


def test_enumerate_csv_row(capsys):
    code, out, _ = run(capsys, "enumerate", "--s", "9/10", "--cutoff", "0", "--format", "csv")
    assert code == 0
    assert "I(Xi)*I(Xi)*I(Xi),3s - 9/2 - 3k,-9/5,W,0,3,6,1 - 10/3k,6" in out.splitlines()


def test_enumerate_is_byte_identical(capsys):
    _, a, _ = run(capsys, "enumerate", "--s", "19/20", "--cutoff", "0")
    _, b, _ = run(capsys, "enumerate", "--s", "19/20", "--cutoff", "0")
    assert a == b


@pytest.mark.parametrize("argv", [
    ["enumerate", "--s", "3/4", "--cutoff", "0"],
    ["enumerate", "--s", "0.9"],
    ["enumerate"],
    ["check", "--suite", "nope"],
    ["check", "--suite", "symmetry", "--gamma", "13/10"],
    ["simulate", "--s", "3/2"],
])
def test_usage_errors_exit_2(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_subcritical_witness_reported(capsys):
    _, _, err = run(capsys, "enumerate", "--s", "3/4", "--cutoff", "0")
    assert "I(Xi)*I(Xi)*I(Xi)" in err


def test_output_dir(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("FRACPHI_OUTPUT_DIR", str(tmp_path))
    code, out, _ = run(capsys, "enumerate", "--s", "19/20", "--cutoff", "0", "--output", "sub/trees.json")
    assert code == 0 and out == ""
    assert json.loads((tmp_path / "sub" / "trees.json").read_text())["s"] == "19/20"


@pytest.mark.parametrize("suite", ["duality", "dpd", "symmetry"])
def test_check_passes(capsys, suite):
    code, out, _ = run(capsys, "check", "--suite", suite, "--s", "19/20")
    assert code == 0 and f"{suite}: PASS" in out


def test_check_reports_failure(capsys):
    code, out, _ = run(capsys, "check", "--suite", "decoration-table", "--s", "19/20")
    assert code == 1 and "FAIL" in out


def test_simulate_zero(capsys):
    code, out, _ = run(capsys, "simulate", "--zero", "--n", "16", "--T", "0.01", "--dt", "1e-3")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("# s=0.8") and "max_ratio=0.000000" in lines[0]
    assert all(float(line.split(",")[1]) == 0 for line in lines[2:])


def test_simulate_unstable_step(capsys):
    code, _, err = run(capsys, "simulate", "--amplitude", "1e20", "--n", "16", "--T", "0.01", "--dt", "1e-3",
                       "--scheme", "ETD1")
    assert code == 2 and "error" in err


def test_fraclap_compare(capsys):
    code, out, _ = run(capsys, "simulate", "--fraclap-compare", "--s", "1/2", "--s", "4/5", "--n", "256",
                       "--radius", "32")
    assert code == 0
    header, *rows = out.splitlines()
    assert header == "s,fourier,singular,bochner" and len(rows) == 2
    for row in rows:
        _, fourier, singular, bochner = map(float, row.split(","))
        assert fourier < 1e-12 and singular < 1e-4 and bochner < 1e-6
