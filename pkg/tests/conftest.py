"""Shared test helpers and the acceptance-summary hook."""

import numpy as np
import pytest

# (name, passed, detail) tuples appended by tests/test_acceptance.py
ACCEPTANCE_LOG: list[tuple[str, bool, str]] = []


def record_acceptance(name: str, passed: bool, detail: str) -> None:
    ACCEPTANCE_LOG.append((name, passed, detail))
    assert passed, f"{name}: {detail}"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LOG:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE_LOG:
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"{status}  {name}: {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(20250808)
