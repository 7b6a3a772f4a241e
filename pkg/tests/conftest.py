import os
import sys

import pytest

CRITERIA = {
    1: "canonical commutator is exactly i*hbar",
    2: "classical limits of the brackets",
    3: "symbolic star associativity",
    4: "Wigner closed forms at the origin",
    5: "marginals and total mass",
    6: "phase-space expectations match the oracle",
    7: "density-operator symbol",
    8: "corrected idempotency and mixed purity",
    9: "wavefunction recovery",
    10: "Moyal flow intertwines with the oracle",
    11: "harmonic periodicity and centroid",
    12: "quantum-classical gap shrinks with hbar",
    13: "Baker-bracket energy laws",
    14: "quantum Hamilton-Jacobi residual and tripwire",
    15: "displacement algebra",
    16: "full verify run under 5 minutes, exit 0",
}

_outcomes = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        n = mark.args[0]
        detail = dict(item.user_properties).get("value", "")
        prev = _outcomes.get(n)
        if not rep.passed:
            detail = str(rep.longrepr).splitlines()[-1][:160]
        elif prev and prev[1]:
            detail = f"{prev[1]}; {detail}" if detail else prev[1]
        _outcomes[n] = (rep.passed and (prev is None or prev[0]), detail)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n, title in CRITERIA.items():
        if n not in _outcomes:
            continue
        ok, detail = _outcomes[n]
        tr.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n:>2}: {title}  {detail}")


@pytest.fixture(scope="session")
def grid():
    from moyalkit.phasespace import GridSpec
    return GridSpec(256, 20.0, 1.0)


@pytest.fixture
def cli_env():
    env = dict(os.environ)
    env.pop("MOYALKIT_FLIP_Q_SIGN", None)
    return env


PYTHON = sys.executable
