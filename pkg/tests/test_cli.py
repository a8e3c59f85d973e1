import csv
import json

import numpy as np
import pytest

from qrc_sas import cli

SPECS = {
    "bad": "[channel]\nfamily = lindblad_bad\ngamma = 1.0\nh = 1.0\ndt = 1.0\n[run]\nseed = 7\n",
    "good": "[channel]\nfamily = lindblad_good\ngamma = 1.0\nh = 1.0\ndt = 1.0\n[run]\nseed = 7\n",
    "depol": "[channel]\nfamily = depolarizing\nlam_min = 0.2\nlam_max = 0.6\n[run]\nseed = 1\n",
    "ing_scan": "[channel]\nfamily = lindblad_ing\ndt = 1.0\n[scan]\nn = 9\nh_max = 2.0\ngamma_max = 2.0\n",
}


def write_spec(tmp_path, name, text=None):
    path = tmp_path / f"{name}.ini"
    path.write_text(SPECS[name] if text is None else text)
    return path


def run(*args):
    return cli.main([str(a) for a in args])


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def analyze(tmp_path, name, lattice=11):
    out = tmp_path / f"{name}.json"
    assert run("analyze", "--spec", write_spec(tmp_path, name), "--out", out, "--lattice", lattice) == 0
    return out, json.loads(out.read_text())


def test_analyze_bad(tmp_path):
    _, rep = analyze(tmp_path, "bad")
    a = rep["assertions"]
    assert a["esp_certified"] and a["input_independent_fixed_point"] and not a["unital"]
    assert a["filter"] == "constant" and a["filter_prediction_verified"]
    assert rep["esp"]["rate"] == pytest.approx(np.exp(-0.5), abs=1e-12)
    assert rep["seed"] == 7


def test_analyze_good_and_depolarizing(tmp_path):
    _, good = analyze(tmp_path, "good")
    assert good["assertions"]["filter"] == "input_dependent"
    assert not good["assertions"]["input_independent_fixed_point"]
    _, dep = analyze(tmp_path, "depol")
    assert dep["assertions"]["filter"] == "I/d" and dep["assertions"]["unital"]


def test_analyze_is_byte_deterministic(tmp_path):
    a, _ = analyze(tmp_path, "good")
    first = a.read_bytes()
    a2, _ = analyze(tmp_path, "good")
    assert a2.read_bytes() == first


def test_analyze_uncertified_family(tmp_path):
    spec = write_spec(tmp_path, "ing", "[channel]\nfamily = lindblad_ing\ngamma = 1.0\nh = 1.0\n")
    out = tmp_path / "ing.json"
    assert run("analyze", "--spec", spec, "--out", out, "--lattice", 11) == 0
    rep = json.loads(out.read_text())
    assert rep["assertions"]["filter"] == "not_certified"
    assert rep["esp"]["verdict"] == "necessary_condition_failed"


def test_scan_columns_and_blank_band(tmp_path):
    out = tmp_path / "scan.csv"
    assert run("scan", "--spec", write_spec(tmp_path, "ing_scan"), "--out", out) == 0
    rows = read_csv(out)
    assert rows[0] == ["h_t", "gamma", "sigma1", "sigma2", "sigma3", "max_eig_mod_traceless"]
    body = rows[1:]
    assert len(body) == 81
    blank = [r for r in body if r[2] == ""]
    assert blank and all(abs(float(r[1]) - float(r[0])) <= 1e-3 for r in blank)
    assert all(r[2:] == ["", "", "", ""] for r in blank)


def test_single_point_scan_matches_analyze(tmp_path):
    text = "[channel]\nfamily = lindblad_bad\ndt = 1.0\ngamma = 2.0\nh = 2.0\n[scan]\nn = 1\nh_max = 2.0\ngamma_max = 2.0\n"
    spec = write_spec(tmp_path, "one", text)
    out = tmp_path / "one.csv"
    assert run("scan", "--spec", spec, "--out", out) == 0
    (row,) = read_csv(out)[1:]
    rep_path = tmp_path / "one.json"
    assert run("analyze", "--spec", spec, "--out", rep_path, "--lattice", 5) == 0
    rep = json.loads(rep_path.read_text())
    assert np.allclose([float(v) for v in row[2:5]], rep["labelled_singular_values"], atol=1e-12)


def test_drive_bad_reaches_ground_state(tmp_path):
    out = tmp_path / "drive.csv"
    assert run("drive", "--spec", write_spec(tmp_path, "bad"), "--out", out, "--steps", 60) == 0
    rows = read_csv(out)
    assert rows[0] == ["t", "z_t", "sx", "sy", "sz"]
    assert len(rows) == 61
    t50 = np.array([float(v) for v in rows[50][2:]])
    assert np.allclose(t50, [0, 0, -1], atol=1e-8)


def test_drive_good_keeps_fluctuating(tmp_path):
    out = tmp_path / "drive.csv"
    assert run("drive", "--spec", write_spec(tmp_path, "good"), "--out", out, "--steps", 300) == 0
    e = np.array([[float(v) for v in r[2:]] for r in read_csv(out)[101:]])
    assert np.max(np.abs(e[:, 0])) < 1e-8
    assert np.std(e[:, 1]) > 1e-3 and np.std(e[:, 2]) > 1e-3


def test_drive_constant_family_matches_analyze_fixed_point(tmp_path):
    out = tmp_path / "drive.csv"
    assert run("drive", "--spec", write_spec(tmp_path, "depol"), "--out", out, "--steps", 200) == 0
    last = np.array([float(v) for v in read_csv(out)[-1][2:]])
    _, rep = analyze(tmp_path, "depol")
    pairs = np.array(rep["assertions"]["constant_filter"])  # complex entries stored as [re, im]
    rho = pairs[..., 0] + 1j * pairs[..., 1]
    assert np.allclose(rho, np.eye(2) / 2)
    assert np.allclose(last, 0, atol=1e-12)


def test_drive_zero_steps_writes_header(tmp_path):
    out = tmp_path / "drive.csv"
    assert run("drive", "--spec", write_spec(tmp_path, "bad"), "--out", out, "--steps", 0) == 0
    assert out.read_text() == "t,z_t,sx,sy,sz\n"


def test_seed_override_changes_inputs(tmp_path):
    spec = write_spec(tmp_path, "good")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run("drive", "--spec", spec, "--out", a, "--steps", 5) == 0
    assert run("drive", "--spec", spec, "--out", b, "--steps", 5, "--seed", 8) == 0
    assert a.read_text() != b.read_text()


def test_outdir_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTDIR_ENV, str(tmp_path / "outputs"))
    assert run("drive", "--spec", write_spec(tmp_path, "bad"), "--steps", 3) == 0
    assert (tmp_path / "outputs" / "drive.csv").exists()


def test_verify_filter_and_tolerance(capsys):
    assert run("verify", "--filter", "basis") == 0
    out = capsys.readouterr().out
    assert out.startswith("[PASS]") and "1/1 checks passed" in out
    assert run("verify", "--filter", "example_bad", "--tol", 1e-30) == 1
    assert "[FAIL]" in capsys.readouterr().out


@pytest.mark.parametrize("text", [
    "[channel]\nfamily = nonsense\n",
    "[channel]\nfamily = lindblad_good\ngamma = -1\n",
    "[channel]\nfamily = blend\neps = 1.5\n",
    "[input]\nlo = 0\n",
])
def test_bad_spec_exit_code(tmp_path, text):
    spec = write_spec(tmp_path, "broken", text)
    assert run("analyze", "--spec", spec, "--out", tmp_path / "x.json") == 2
    assert not (tmp_path / "x.json").exists()


def test_missing_spec_and_unknown_command(tmp_path):
    assert run("analyze") == 2
    assert run("analyze", "--spec", tmp_path / "nope.ini") == 2
    assert run("frobnicate") == 2
