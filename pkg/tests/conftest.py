import pytest

from squaredot.exact import SquareDotSolver

# populated by test_acceptance.py; printed after the run
CRITERIA = {}


@pytest.fixture(scope="session")
def solver6():
    """Cheap solver for unit tests (L = 400 nm)."""
    return SquareDotSolver(L=400.0, n_max=6, quadrature_order=16, spectrum_cutoff=20)


@pytest.fixture(scope="session")
def eff6(solver6):
    return solver6.effective_params()


@pytest.fixture(scope="session")
def solver8():
    return SquareDotSolver(L=400.0, n_max=8, quadrature_order=24, spectrum_cutoff=20)


@pytest.fixture(scope="session")
def solver10():
    """Acceptance-grade solver: n_max = 10, quadrature order 32."""
    return SquareDotSolver(L=400.0, n_max=10, quadrature_order=32, spectrum_cutoff=30)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(CRITERIA):
        terminalreporter.write_line(CRITERIA[key])
