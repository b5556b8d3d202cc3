import numpy as np
import pytest

from indsub.linalg import orthonormalize


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_basis(rng, n, d):
    return orthonormalize(rng.standard_normal((n, d)))


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if "test_acceptance.py::" in rep.nodeid and rep.when == "call":
                name = rep.nodeid.split("::")[-1]
                lines.append((name, "PASS" if outcome == "passed" else "FAIL"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for name, status in sorted(lines):
            terminalreporter.write_line(f"{status}  {name}")
