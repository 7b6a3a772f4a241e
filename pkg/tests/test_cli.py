import json
import subprocess
import sys

import numpy as np
import pytest

from moyalkit.cli import main


def run(*args, env=None):
    return subprocess.run([sys.executable, "-m", "moyalkit", *args], capture_output=True, text=True, env=env)


@pytest.mark.parametrize("expr, extra, want", [
    ("star(x,p)-star(p,x)", [], "i*hbar"),
    ("mb(x^3,p^3)", [], "9*x^2*p^2 - (3/2)*hbar^2"),
    ("mb(x^3,p^3)", ["--truncate", "0"], "9*x^2*p^2"),
    ("mb(x^3,p^3)", ["--hbar", "0.5"], "9*x^2*p^2 - 3/8"),
    ("star(x,p)", ["--hbar-symbolic"], "x*p + (1/2)*i*hbar"),
])
def test_star(capsys, expr, extra, want):
    assert main(["star", "--expr", expr, *extra]) == 0
    assert capsys.readouterr().out.strip() == want


def test_star_parse_error(capsys):
    assert main(["star", "--expr", "x + y"]) == 2
    assert "column 5" in capsys.readouterr().err


def test_wigner_files(tmp_path, capsys):
    out = tmp_path / "w.csv"
    assert main(["wigner", "--state", "ho(n=1)", "--out", str(out), "--marginals", "--negativity"]) == 0
    data = np.loadtxt(out, delimiter=",", skiprows=1)
    at0 = data[(data[:, 0] == 0) & (data[:, 1] == 0), 2]
    assert abs(at0[0] + 1 / np.pi) < 1e-6
    assert out.read_text().splitlines()[0] == "x,p,value"
    meta = json.loads(out.with_suffix(".json").read_text())
    assert meta["state"] == "ho(n=1)" and meta["grid"]["n"] == 256 and "version" in meta["tool"]
    assert (tmp_path / "w_marginals.csv").exists()
    summary = json.loads(capsys.readouterr().out)
    assert summary["negativity"]["min"] < 0


def test_wigner_is_byte_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert main(["wigner", "--state", "cat(x0=1.5, sigma=1)", "--grid", "n=128,L=24", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_gaussian_negativity(tmp_path, capsys):
    assert main(["wigner", "--state", "gaussian(x0=0,p0=0,sigma=1)", "--negativity",
                 "--out", str(tmp_path / "g.csv")]) == 0
    assert json.loads(capsys.readouterr().out)["negativity"]["min"] >= -1e-10


@pytest.mark.parametrize("args", [
    ["wigner", "--state", "ho(n=", "--out", "x.csv"],
    ["wigner", "--state", "ho(n=1)", "--grid", "n=100,L=20", "--out", "x.csv"],
    ["wigner", "--state", "ho(n=1)", "--grid", "bogus", "--out", "x.csv"],
    ["evolve", "--config", "missing.json"],
])
def test_usage_errors_exit_2(tmp_path, monkeypatch, args):
    monkeypatch.chdir(tmp_path)
    assert main(args) == 2


def test_argparse_errors_exit_2():
    assert run("star").returncode == 2
    assert run("verify", "--suite", "nope").returncode == 2


def config(tmp_path, **over):
    cfg = {"state": "gaussian(x0=1, p0=0.5, sigma=1)", "grid": {"n": 128, "L": 20, "hbar": 1},
           "hamiltonian": {"mass": 1, "potential": [0, 0, "1/2"]},
           "evolution": {"dt": 0.01, "t_final": 0.5, "record_every": 25}, "output": "out"}
    cfg.update(over)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path


def test_evolve_all_writes_divergence_log(tmp_path, capsys):
    assert main(["evolve", "--config", str(config(tmp_path)), "--engine", "all"]) == 0
    out = tmp_path / "out"
    manifest = json.loads((out / "manifest.json").read_text())
    assert "divergence.csv" in manifest["files"]
    log = np.loadtxt(out / "divergence.csv", delimiter=",", skiprows=1)
    assert log[:, 1].max() <= 1e-6
    assert (out / "moyal" / "frame_0002.csv").exists() and (out / "moyal" / "frame_0002.json").exists()
    assert json.loads((out / "moyal" / "frame_0002.json").read_text())["time"] == pytest.approx(0.5)


@pytest.mark.filterwarnings("ignore::moyalkit.phasespace.DomainWarning")
def test_evolve_quartic_departs_from_classical(tmp_path, capsys):
    path = config(tmp_path, hamiltonian={"potential": [0, 0, 0, 0, "1/4"]}, state="cat(x0=1.5, sigma=1)",
                  grid={"n": 256, "L": 20}, evolution={"dt": 0.002, "t_final": 2})
    assert main(["evolve", "--config", str(path), "--engine", "all"]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["divergence_final"]["moyal_vs_classical"] > 0.05


def test_evolve_with_potential_table(tmp_path, capsys):
    x = -10 + 20 / 128 * np.arange(128)
    np.savetxt(tmp_path / "v.csv", np.column_stack([x, 0.5 * x ** 2]), delimiter=",", header="x,V", comments="")
    path = config(tmp_path, hamiltonian={"potential_table": "v.csv"})
    assert main(["evolve", "--config", str(path), "--engine", "moyal"]) == 0


@pytest.mark.parametrize("over", [
    {"extra": 1},
    {"grid": {"n": 128, "L": 20, "dx": 0.1}},
    {"hamiltonian": {"potential": [0], "potential_table": "v.csv"}},
    {"evolution": {"dt": -1, "steps": 2}},
    {"hamiltonian": {"potential_table": "missing.csv"}},
    {"state": "ho(n=-1)"},
])
def test_evolve_rejects_bad_config(tmp_path, over):
    assert main(["evolve", "--config", str(config(tmp_path, **over))]) == 2


def test_verify_algebra_suite(tmp_path):
    report = tmp_path / "r.json"
    proc = run("verify", "--suite", "algebra", "--report", str(report))
    assert proc.returncode == 0
    data = json.loads(report.read_text())
    assert data["passed"] and data["count"] >= 8
    assert {c["criterion"] for c in data["checks"]} >= {1, 2, 3}


def test_verify_only_with_no_match():
    assert run("verify", "--suite", "algebra", "--only", "no_such_check").returncode == 2
