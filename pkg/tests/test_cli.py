import csv
import io
import json
import math

import pytest

from paralab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_area_csv_has_requested_rows(capsys):
    code, out, _ = run(capsys, "area", "--germ", "f0", "--z0", "-0.5", "--eps-range", "1e-4:1e-2", "--n", "50")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert len(rows) == 51
    assert rows[0][0] == "eps"
    assert all(not math.isnan(float(x)) for r in rows[1:] for x in r)


def test_area_is_reproducible(capsys):
    args = ("area", "--z0", "-0.3", "--eps-range", "1e-3:1e-2", "--n", "7")
    assert run(capsys, *args)[1] == run(capsys, *args)[1]


def test_area_csv_carries_working_precision(capsys, tmp_path):
    out = tmp_path / "a.csv"
    code, _, _ = run(capsys, "area", "--n", "2", "--precision", "30", "-o", str(out))
    assert code == 0
    rows = list(csv.reader(out.open()))
    assert len(rows[1][1]) > 28
    meta = json.loads((tmp_path / "a.csv.config.json").read_text())
    assert meta["config"]["precision"] == 30


def test_cocycle_has_closed_form_column(capsys):
    code, out, _ = run(capsys, "cocycle", "--germ", "f0", "--rhs", "-z", "--points", "auto", "--precision", "40")
    assert code == 0
    doc = json.loads(out)
    assert doc["config"]["precision"] == 40
    for s in doc["result"]["samples"]:
        assert s["closed_form"] is not None
        assert s["closed_form_rel_error"] < 1e-25


def test_config_file_and_flag_override(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"z0": "-0.25", "n": 4}))
    code, out, _ = run(capsys, "orbit", "--config", str(cfg), "--n", "3")
    doc = json.loads(out)
    assert code == 0
    assert doc["config"]["z0"] == "-0.25" and doc["config"]["n"] == 3
    assert len(doc["result"]["points"]) == 4
    assert doc["result"]["points"][1][0] == pytest.approx(-0.2)


@pytest.mark.parametrize("argv,code,kind", [
    (("area", "--eps-range", "1e-2:1e-4"), 2, "PreconditionError"),
    (("orbit", "--germ", "nope"), 2, "DomainError"),
    (("solve-cohom", "--rhs", "q+"), 2, "DomainError"),
    (("moment", "--q-window", "1e-14:1e-9"), 3, "PrecisionError"),
    (("ev-modulus", "--germ", "log2exp", "--method", "two-sided"), 2, "NotInvertibleError"),
])
def test_errors_are_json_with_exit_codes(capsys, argv, code, kind):
    got, _, err = run(capsys, *argv)
    assert got == code
    assert json.loads(err.strip().splitlines()[-1])["error"] == kind


def test_unknown_config_field(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    code, _, err = run(capsys, "orbit", "--config", str(cfg))
    assert code == 2 and "bogus" in err


def test_construct_global_and_solve(capsys):
    code, out, _ = run(capsys, "construct-global", "--phi", "id", "--rhs", "z^2", "--order", "4")
    doc = json.loads(out)["result"]
    assert code == 0 and doc["l"] == 2 and doc["residual"] < 1e-13
    code, out, _ = run(capsys, "solve-cohom", "--rhs", "-pi*z", "--points", "-0.5")
    v = json.loads(out)["result"]["values"][0]["H"]
    assert v[0] == pytest.approx(math.pi * (1 - 0.5772156649015329), abs=1e-12)


def test_reconstruct_orbit(capsys):
    code, out, _ = run(capsys, "reconstruct-orbit")
    doc = json.loads(out)["result"]
    assert code == 0
    assert doc["thresholds"][0] == pytest.approx(1 / 24, abs=1e-8)


def test_verify_core_passes(capsys):
    code, out, err = run(capsys, "verify", "--suite", "core")
    assert code == 0
    assert json.loads(out)["result"]["passed"] is True
    assert err.count("[PASS]") == 8
