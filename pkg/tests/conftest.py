import numpy as np
import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_hermitian(rng, sites, bound=1.0, diag_real=True):
    """Hermitian matrix with every |q_ij| <= bound."""
    mod = rng.uniform(0, bound, size=(sites, sites))
    ang = rng.uniform(0, 2 * np.pi, size=(sites, sites))
    q = np.triu(mod * np.exp(1j * ang), 1)
    q = q + q.conj().T
    if diag_real:
        q += np.diag(rng.uniform(-bound, bound, size=sites))
    return q


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
