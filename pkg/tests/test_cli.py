import csv
import json
import math
from pathlib import Path

import pytest

from nlslab.cli import main

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("name,code", [("sy", 0), ("defocusing", 0), ("kuznetsov-ma", 0), ("supercritical", 0),
                                       ("townes", 0), ("bad-grid", 2)])
def test_golden_scenarios(tmp_path, capsys, name, code):
    rc, _, _ = run(capsys, "run", str(SCENARIOS / f"{name}.scn"), "--out", str(tmp_path))
    assert rc == code


def test_sy_report(tmp_path, capsys):
    run(capsys, "run", str(SCENARIOS / "sy.scn"), "--out", str(tmp_path))
    out = tmp_path / "sy"
    rep = json.loads((out / "report.json").read_text())
    assert abs(rep["invariants"]["m"] - 16) < 1e-8
    assert rep["verdict"]["status"] == "NotPrecluded"
    assert all(c["rel_residual"] < 1e-5 for c in rep["identity_checks"])
    rows = list(csv.reader((out / "profile.csv").open()))
    assert rows[0] == ["x", "re", "im"] and len(rows) == 2049


def test_defocusing_outputs(tmp_path, capsys):
    run(capsys, "run", str(SCENARIOS / "defocusing.scn"), "--out", str(tmp_path))
    out = tmp_path / "defocusing"
    rep = json.loads((out / "report.json").read_text())
    assert rep["verdict"]["rule"] == "R1"
    assert rep["verdict"]["monotone_fraction"] == 1.0
    header = (out / "series.csv").read_text().splitlines()[0]
    assert header == "t,m,e,p,m_nz,e_nz,p_nz,p_tilde,variance,dnls_h,psi,virial"


def test_failed_expectation_exits_1(tmp_path, capsys):
    scn = write(tmp_path, "wrong.scn", "name = wrong\nsource.catalog = satsuma-yajima\nchecks = invariants\n"
                                       "expect.invariants.m = 15 +- 1e-8\n")
    rc, _, err = run(capsys, "run", scn, "--out", str(tmp_path / "o"))
    assert rc == 1
    assert "invariants.m" in err


def test_unexpected_blowup_exits_1(tmp_path, capsys):
    text = (SCENARIOS / "supercritical.scn").read_text().replace("evolve.expect_blowup = true\n", "")
    rc, _, err = run(capsys, "run", write(tmp_path, "boom.scn", text), "--out", str(tmp_path / "o"))
    assert rc == 1
    assert "blow" in err


@pytest.mark.parametrize("text,where", [
    ("name = x\nsource.catalog = satsuma-yajima\ngrid.M = 3\n", ":3:1:"),
    ("name = x\nsource.catalog = satsuma-yajima\ngrid.L = abc\n", ":3:10:"),
    ("name = x\nsource.catalog satsuma-yajima\n", ":2:"),
    ("name = x\nname = y\n", ":2:1:"),
    ("source.catalog = no-such-solution\n", ":1:18:"),
])
def test_parse_errors(tmp_path, capsys, text, where):
    scn = write(tmp_path, "bad.scn", text)
    rc, _, err = run(capsys, "run", scn, "--out", str(tmp_path / "o"))
    assert rc == 2
    assert scn + where in err


def test_bad_grid_location(tmp_path, capsys):
    rc, _, err = run(capsys, "run", str(SCENARIOS / "bad-grid.scn"), "--out", str(tmp_path))
    assert rc == 2
    assert "bad-grid.scn:4:10:" in err and "power of two" in err


def test_report_deterministic(tmp_path, capsys):
    for d in ("a", "b"):
        run(capsys, "run", str(SCENARIOS / "defocusing.scn"), "--out", str(tmp_path / d))
    a = (tmp_path / "a" / "defocusing" / "report.json").read_bytes()
    b = (tmp_path / "b" / "defocusing" / "report.json").read_bytes()
    assert a == b
    meta = json.loads((tmp_path / "a" / "defocusing" / "metadata.json").read_text())
    assert "created_unix" in meta and "elapsed_seconds" in meta


def test_parallel_run_takes_worst_code(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("NLSLAB_THREADS", "2")
    rc, _, _ = run(capsys, "run", str(SCENARIOS / "sy.scn"), str(SCENARIOS / "bad-grid.scn"),
                   str(SCENARIOS / "townes.scn"), "--out", str(tmp_path))
    assert rc == 2
    assert (tmp_path / "sy" / "report.json").exists() and (tmp_path / "townes" / "report.json").exists()


def test_list_catalog(capsys):
    rc, out, _ = run(capsys, "list-catalog")
    assert rc == 0
    lines = {ln.split()[0]: ln for ln in out.splitlines()[1:] if ln.strip()}
    assert "pi/4" in lines["satsuma-yajima"]
    assert "a > 1/2" in lines["kuznetsov-ma"]
    assert "aperiodic" in lines["peregrine"]


def test_ground_state_command(tmp_path, capsys):
    csv_path = tmp_path / "q.csv"
    cache = tmp_path / "th.json"
    rc, out, _ = run(capsys, "ground-state", "--p", "6", "--n", "1", "--csv", str(csv_path), "--cache", str(cache))
    assert rc == 0
    d = json.loads(out)
    assert d["omega_eff"] == pytest.approx(5 / 6)
    assert d["residual"] < 1e-8
    assert csv_path.read_text().startswith("x,Q\n")
    assert len(json.loads(cache.read_text())) == 1


def test_ground_state_bad_input(capsys):
    rc, _, err = run(capsys, "ground-state", "--p", "-1")
    assert rc == 2 and "error" in err


@pytest.mark.parametrize("sid,check,key,value", [
    ("satsuma-yajima", "invariants", "invariants", None),
    ("kuznetsov-ma:a=1", "pde-residual", "residual", None),
    ("satsuma-yajima", "virial-identity", "rel_residual", None),
    ("kuznetsov-ma", "appendix", "residual", None),
    ("kuznetsov-ma:a=1", "period", "period", math.pi / math.sqrt(2)),
    ("log-breather", "classify", "verdict", None),
])
def test_verify(capsys, sid, check, key, value):
    rc, out, _ = run(capsys, "verify", "--solution", sid, "--check", check, "--t", "0.1")
    assert rc == 0
    d = json.loads(out)
    assert d["passed"] is True and key in d
    if value is not None:
        assert d[key] == pytest.approx(value)


def test_verify_errors(capsys):
    assert run(capsys, "verify", "--solution", "nope", "--check", "invariants")[0] == 2
    assert run(capsys, "verify", "--solution", "satsuma-yajima", "--check", "appendix")[0] == 2
    assert run(capsys, "verify", "--solution", "kuznetsov-ma:a=0.3", "--check", "period")[0] == 2
