import sys

import numpy as np
import pytest

from gframe_lab import scenarios


def random_hermitian(rng, n, cond=None):
    if cond is None:
        X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        return X + X.conj().T
    V = scenarios.random_unitary(rng, n)
    lam = np.exp(rng.uniform(0, np.log(cond), n))
    lam[0], lam[-1] = 1.0, cond
    return (V * lam) @ V.conj().T


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def ex15():
    return scenarios.example_1_5(1024)


@pytest.fixture(scope="session")
def diag():
    return scenarios.diag_example()


@pytest.fixture(scope="session")
def noncommuting():
    return scenarios.noncommuting_fixture()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(mod.RESULTS, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
