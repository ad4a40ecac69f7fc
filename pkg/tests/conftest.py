"""Shared oracles: brute-force operators built independently of the library."""
import numpy as np
import pytest
from scipy.linalg import expm


def ladder(N):
    """Annihilation operator on levels 0..N, written out directly."""
    return np.diag(np.sqrt(np.arange(1, N + 1)), 1).astype(complex)


def vacuum_vec(N):
    v = np.zeros(N + 1, complex)
    v[0] = 1
    return v


def expm_state(generator, N_big, N_keep, start=None):
    """exp(generator) applied to ``start`` on a large space, truncated to N_keep."""
    v = vacuum_vec(N_big) if start is None else start
    out = expm(generator) @ v
    return out[: N_keep + 1]


def quadrature_ops(N):
    a = ladder(N)
    x = (a + a.conj().T) / np.sqrt(2)
    p = (a - a.conj().T) / (1j * np.sqrt(2))
    return x, p


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    """Store and print the one-line verdict of an acceptance criterion."""
    line = f"{'PASS' if passed else 'FAIL'} criterion {number:2d}: {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
