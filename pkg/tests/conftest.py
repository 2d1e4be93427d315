import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_spinors(rng, n):
    return rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2))


_ACCEPTANCE = {}


@pytest.fixture
def record():
    """Store one verdict line per acceptance criterion for the terminal summary."""
    def _record(criterion, passed, detail):
        _ACCEPTANCE[criterion] = (bool(passed), detail)
        return passed
    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE, key=lambda k: (int(k.split(".")[0]), k)):
        passed, detail = _ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key:>4}: {'PASS' if passed else 'FAIL'}  {detail}")
