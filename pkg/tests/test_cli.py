import csv
import json

import pytest

from porosity_lab.cli import run
from porosity_lab.manifest import Manifest


@pytest.fixture
def corpus(tmp_path):
    path = tmp_path / "a.json"
    assert run(["generate", "--kind", "cantor1d", "--depth", "8", "--spacing", "auto",
                "--out", str(path)]) == 0
    return path


def test_generate(corpus, capsys):
    m = Manifest.read(corpus)
    assert len(m.subsets["A"]) == 256
    assert m.meta["spec"]["depth"] == 8


def test_porosity_rows(corpus, tmp_path, capsys):
    capsys.readouterr()
    out = tmp_path / "p.csv"
    assert run(["porosity", "--in", str(corpus), "--rmin", "auto", "--rmax", "0.3",
                "--scales", "12", "--sample", "64", "--out", str(out)]) == 0
    summary = json.loads(capsys.readouterr().out)
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["x_id", "r", "rho_hat", "witness_id"]
    assert len(rows) == 1 + 64 * 12
    assert summary["rho_star"] == min(float(r[2]) for r in rows[1:])


def test_unknown_subcommand(capsys):
    assert run(["frobnicate"]) == 2
    assert "usage" in capsys.readouterr().err


def test_usage_errors(corpus, capsys):
    assert run(["porosity", "--in", str(corpus)]) == 2
    assert run(["generate", "--kind", "cantor1d", "--depth", "3", "--spacing", "fine",
                "--out", "x.json"]) == 2


def test_analysis_error_is_json(corpus, capsys):
    capsys.readouterr()
    assert run(["porosity", "--in", str(corpus), "--rmin", "1e-7", "--rmax", "0.3"]) == 1
    diag = json.loads(capsys.readouterr().err)
    assert diag["error"] == "resolution"


def test_missing_input(tmp_path, capsys):
    assert run(["net", "--in", str(tmp_path / "nope.json")]) == 1
    assert json.loads(capsys.readouterr().err)["error"] == "io_error"


def test_net_and_regularity(corpus, tmp_path, capsys):
    capsys.readouterr()
    assert run(["net", "--in", str(corpus), "--radius", "0.05", "--out", str(tmp_path / "n.csv")]) == 0
    net = json.loads(capsys.readouterr().out)
    assert net["separation_ok"] and net["coverage_ok"]
    assert run(["regularity", "--in", str(corpus), "--rmax", "0.25",
                "--out", str(tmp_path / "r.csv")]) == 0
    fit = json.loads(capsys.readouterr().out)
    assert abs(fit["s_hat"] - 0.6309) < 0.05
    assert fit["a_hat"] <= fit["b_hat"]


def test_decay_and_verify(corpus, tmp_path, capsys):
    x0 = int(Manifest.read(corpus).subsets["A"][10])
    out = tmp_path / "d.json"
    assert run(["decay", "--in", str(corpus), "--x0", str(x0), "--r0", "0.3",
                "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["delta_empirical"] > rep["delta_theory"] > 0
    capsys.readouterr()
    assert run(["verify", "--in", str(corpus)]) == 0
    assert json.loads(capsys.readouterr().out)["ok"]


def test_envelope_and_verify(tmp_path, capsys):
    src = tmp_path / "b.json"
    assert run(["generate", "--kind", "cantor1d", "--depth", "6", "--spacing", "2e-5",
                "--out", str(src)]) == 0
    env = tmp_path / "e.json"
    rep = tmp_path / "rep"
    assert run(["envelope", "--in", str(src), "--rho", "0.15", "--t", "0.8", "--J", "2",
                "--plant-depth", "5", "--on-deficit", "record", "--out", str(env),
                "--reports", str(rep)]) == 0
    for name in ("nu_bound.csv", "counts.csv", "counting.csv", "nu_fit.csv"):
        assert (rep / name).exists()
    m = Manifest.read(env)
    assert m.meta["kind"] == "envelope" and "nu" in m.measures
    capsys.readouterr()
    assert run(["verify", "--in", str(env)]) == 0


def test_verify_detects_tampering(corpus, tmp_path, capsys):
    raw = json.loads(corpus.read_text())
    raw["measures"]["mu"][0] = "0.5"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(raw))
    assert run(["verify", "--in", str(bad)]) == 1
    assert json.loads(capsys.readouterr().err)["error"] == "verification_failed"
