import csv
import json
import subprocess
import sys

import pytest

import mklab.rmt_sim as rs
from mklab.cli import main, read_config


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_nc_enumerate(capsys):
    code, out, _ = run(capsys, "nc", "--k", "3", "enumerate")
    assert code == 0
    assert out.splitlines() == ["{1|2|3}", "{1|2,3}", "{1,2|3}", "{1,2,3}", "{1,3|2}"]


def test_nc_kreweras(capsys):
    code, out, _ = run(capsys, "nc", "--k", "9", "kreweras", "--partition", "{1,7|2,5,6|3|4|8,9}")
    assert code == 0 and out.strip() == "{1,6|2,3,4|5|7,9|8}"


def test_nc_decompositions(capsys, tmp_path):
    dest = tmp_path / "d.json"
    code, out, _ = run(capsys, "nc", "--k", "10", "decompositions", "--partition",
                       "{1,8|2,3|4,6,7|5|9,10}", "--output", str(dest))
    assert code == 0 and len(out.splitlines()) == 4
    data = json.loads(dest.read_text())
    assert data["config"]["k"] == 10
    assert len(data["records"][0]["decompositions"]) == 4


def test_nc_mobius(capsys):
    code, out, _ = run(capsys, "nc", "--k", "3", "mobius", "--partition", "{1|2|3}")
    assert code == 0 and out.split() == ["{1|2|3}", "2"]


@pytest.mark.parametrize("argv", [
    ["nc", "--k", "13", "enumerate"],
    ["nc", "--k", "4", "kreweras", "--partition", "{1,3|2,4}"],
    ["wg", "--k", "2", "--n", "1"],
    ["wg", "--k", "9", "--n", "20"],
    ["verify", "mobius", "--kmax", "20"],
])
def test_rejected_parameters_exit_1(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 1 and err.startswith("error:")


def test_wg(capsys, tmp_path):
    code, out, _ = run(capsys, "wg", "--k", "1", "--n", "5")
    assert code == 0
    assert json.loads(out)["entries"] == [{"cycle_type": [1], "numerator": 1, "denominator": 5}]
    dest = tmp_path / "wg.json"
    code, out, _ = run(capsys, "wg", "--k", "2", "--n", "4", "--output", str(dest))
    vals = {tuple(e["cycle_type"]): (e["numerator"], e["denominator"]) for e in json.loads(dest.read_text())["entries"]}
    assert vals == {(1, 1): (1, 15), (2,): (-1, 60)}


@pytest.mark.parametrize("suite,kmax", [("thm12", 7), ("prop_decomp", 7), ("mobius", 5),
                                        ("weingarten_asym", 4), ("group_iso", 6)])
def test_verify_suites_pass(capsys, suite, kmax):
    code, out, _ = run(capsys, "verify", suite, "--kmax", str(kmax))
    assert code == 0
    assert out.splitlines()[-1].startswith(f"PASS {suite}")
    assert "s)" in out.splitlines()[0]


def test_verify_reports_counterexample(capsys, monkeypatch):
    import mklab.cli as cli

    monkeypatch.setattr(cli, "kreweras_decompositions", lambda rho: [])
    code, out, _ = run(capsys, "verify", "prop_decomp", "--kmax", "3")
    assert code == 1
    payload = json.loads(out.splitlines()[-1])
    assert payload["counterexample"]["partition"] == "{1|2}"


def _sim(capsys, tmp_path, *extra):
    prefix = tmp_path / "run"
    code, out, _ = run(capsys, "sim", "--out-prefix", str(prefix), *extra)
    return code, out, prefix


def test_sim_fixed_constant(capsys, tmp_path):
    code, out, prefix = _sim(capsys, tmp_path, "--ensemble", "fixed", "--spectrum-const", "1",
                             "--n", "50", "--trials", "30", "--kmax", "4")
    assert code == 0 and out.strip().endswith("PASS")
    lines = prefix.with_suffix(".csv").read_text().splitlines()
    assert lines[0].startswith("# config: ")
    assert lines[1] == "k,mean,var,stderr,pred_l1,pred_l2,z1,z2"
    rows = list(csv.DictReader(lines[1:]))
    assert [float(r["mean"]) for r in rows] == pytest.approx([1.0] * 4, abs=1e-12)
    meta = json.loads(prefix.with_suffix(".json").read_text())
    assert meta["config"]["seed"] == 0 and meta["config"]["n"] == 50


def test_sim_gue_predictions_and_reproducibility(capsys, tmp_path):
    args = ("--ensemble", "gue", "--n", "60", "--kmax", "6", "--trials", "40", "--seed", "42")
    code, _, prefix = _sim(capsys, tmp_path, *args)
    first = prefix.with_suffix(".csv").read_text()
    rows = list(csv.DictReader(first.splitlines()[1:]))
    assert [float(r["pred_l1"]) for r in rows] == [0, 2, 0, 6, 0, 20]
    assert code in (0, 1)
    _sim(capsys, tmp_path, *args)
    assert prefix.with_suffix(".csv").read_text() == first


def test_sim_wishart_predictions(capsys, tmp_path):
    code, _, prefix = _sim(capsys, tmp_path, "--ensemble", "wishart", "--c", "0.5", "--n", "40",
                           "--kmax", "4", "--trials", "30")
    rows = list(csv.DictReader(prefix.with_suffix(".csv").read_text().splitlines()[1:]))
    assert [float(r["pred_l1"]) for r in rows] == [1.0, 2.0, 4.75, 12.0]


def test_sim_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# demo\nensemble = fixed\nspectrum-const = 2\nn = 20\ntrials = 30\nkmax = 2\nseed = 5\n")
    assert read_config(cfg)["spectrum_const"] == "2"
    code, _, prefix = _sim(capsys, tmp_path, "--config", str(cfg), "--seed", "6")
    assert code == 0
    meta = json.loads(prefix.with_suffix(".json").read_text())
    assert meta["config"]["seed"] == 6 and meta["config"]["ensemble"] == "fixed"
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    code, _, _ = _sim(capsys, tmp_path, "--config", str(bad))
    assert code == 1


def test_sim_interlacing_failure_exits_2(capsys, tmp_path, monkeypatch):
    monkeypatch.setattr(rs, "check_interlacing", lambda lam, lt, tol=None: False)
    code, _, _ = _sim(capsys, tmp_path, "--ensemble", "gue", "--n", "10", "--trials", "30", "--kmax", "2")
    assert code == 2


def test_sim_io_failure_exits_2(capsys, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    code, _, _ = run(capsys, "sim", "--ensemble", "fixed", "--spectrum-const", "1", "--n", "5",
                     "--trials", "30", "--kmax", "1", "--out-prefix", str(blocker / "sub" / "x"))
    assert code == 2


def test_console_script_entry():
    out = subprocess.run([sys.executable, "-m", "mklab.cli", "nc", "--k", "2", "enumerate"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.split() == ["{1|2}", "{1,2}"]
