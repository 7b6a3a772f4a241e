"""Acceptance criteria 1-16, one test each, at the stated tolerances.

Each test runs the matching check from ``moyalkit.verify`` in-process;
criterion 16 runs the full suite through the CLI.  A PASS/FAIL line per
criterion is printed in the terminal summary.
"""
import json
import subprocess
import sys
import time

import pytest

from moyalkit import verify


def run_criterion(n, record_property):
    checks = [c for c in verify.REGISTRY if c.criterion == n]
    assert checks, f"no check registered for criterion {n}"
    results = [verify.run_check(c) for c in checks]
    record_property("value", "; ".join(f"{r.name}={r.value}" for r in results))
    for r in results:
        assert r.ok, f"{r.name}: value={r.value} tol={r.tolerance} {r.detail}"


@pytest.mark.parametrize("n", [pytest.param(n, marks=pytest.mark.criterion(n)) for n in range(1, 16)])
def test_criterion(n, record_property):
    run_criterion(n, record_property)


@pytest.mark.criterion(16)
def test_full_verify_under_five_minutes(tmp_path, record_property, cli_env):
    report = tmp_path / "report.json"
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "moyalkit", "verify", "--suite", "all",
                           "--report", str(report)], capture_output=True, text=True, env=cli_env)
    elapsed = time.perf_counter() - t0
    data = json.loads(report.read_text())
    record_property("value", f"{elapsed:.1f}s, {data['count']} checks, exit {proc.returncode}")
    assert proc.returncode == 0, data["failures"]
    assert elapsed < 300.0


@pytest.mark.criterion(14)
def test_wrong_sign_quantum_potential_tripwire(cli_env, record_property):
    env = dict(cli_env, MOYALKIT_FLIP_Q_SIGN="1")
    proc = subprocess.run([sys.executable, "-m", "moyalkit", "verify", "--suite", "dynamics",
                           "--only", "quantum_hamilton_jacobi"], capture_output=True, text=True, env=env)
    record_property("value", f"wrong-sign build exits {proc.returncode}")
    assert proc.returncode == 1
    assert "FAIL dynamics/quantum_hamilton_jacobi" in proc.stderr
