import numpy as np
import pytest

from wirtinger import build_model, derive


@pytest.fixture(scope="session")
def models():
    """Profile models shared across tests, keyed by exponent triple."""
    cache = {}

    def get(p, q, r):
        key = (float(p), float(q), float(r))
        if key not in cache:
            cache[key] = build_model(derive(*key))
        return cache[key]

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
