import numpy as np
import pytest
from hypothesis import settings

from unischlesinger.families import build_family

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

SIGMA = np.array([[0, 1], [0, 0]], dtype=complex)


@pytest.fixture(scope="session")
def test_loop():
    """N = 2 test family ``expm(0.3 xi sigma + 0.2 xi^-1 sigma^T)`` at M = 64."""
    return build_family("matrix-exponential", {}, 2, 64)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record and assert one acceptance criterion: ``criterion(k, ok, detail)``."""

    def check(k: int, ok: bool, detail: str) -> None:
        line = f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
