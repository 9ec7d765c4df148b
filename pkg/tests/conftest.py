import numpy as np
import pytest

from wcalc.harness import SuiteConfig, random_ensemble, run_identity_suite, run_inequality_suite
from wcalc.phasespace import make_grid

# criterion lines collected by test_acceptance, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def grid():
    return make_grid(1, 64, 6.0)


@pytest.fixture(scope="session")
def coarse():
    return make_grid(1, 32, 5.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def members(grid):
    """A few deterministic ensemble members reused across module tests."""
    return {
        "f": random_ensemble(7, "gauss_mod", 4, grid),
        "a": random_ensemble(8, "rank_one", 3, grid),
        "sp": random_ensemble(9, "sigma_pos", 2, grid),
    }


@pytest.fixture(scope="session")
def identity_results():
    return {r.name: r for r in run_identity_suite(SuiteConfig())}


@pytest.fixture(scope="session")
def inequality_results():
    return {r.name: r for r in run_inequality_suite(SuiteConfig())}


def rel(a, b):
    a = getattr(a, "values", getattr(a, "entries", a))
    b = getattr(b, "values", getattr(b, "entries", b))
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))) / np.max(np.abs(b)))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
