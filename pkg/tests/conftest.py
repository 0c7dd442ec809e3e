import pytest

from hoffmann_dirac import nled, spacetime
from hoffmann_dirac.channel import ChannelSpec


@pytest.fixture(scope="session")
def bi():
    return nled.born_infeld()


@pytest.fixture(scope="session")
def mx():
    return nled.maxwell()


@pytest.fixture(scope="session")
def bi_constants(bi):
    return nled.compute_constants(bi)


def _curved(bi, constants, eps, r_max=3e4, g=0.5):
    p = spacetime.dimensionless_parameters(g, eps, 1.0, constants)
    return spacetime.build_profile(p, bi, spacetime.GridConfig(r_max=r_max), constants)


@pytest.fixture(scope="session")
def curved01(bi, bi_constants):
    """Born-Infeld, g=0.5, eps=0.1, rho=1."""
    return _curved(bi, bi_constants, 0.1)


@pytest.fixture(scope="session")
def curved05(bi, bi_constants):
    """Born-Infeld, g=0.5, eps=0.5, rho=1."""
    return _curved(bi, bi_constants, 0.5)


def flat_maxwell(mx, g, r_max=3e4):
    p = spacetime.dimensionless_parameters(g, 0.0, 0.0, ell_hat=1.0, flat=True)
    return spacetime.build_profile(p, mx, spacetime.GridConfig(r_max=r_max))


@pytest.fixture(scope="session")
def coulomb05(mx):
    """Flat point charge, g=0.5."""
    return flat_maxwell(mx, 0.5)


@pytest.fixture(scope="session")
def free(mx):
    return flat_maxwell(mx, 0.0)


@pytest.fixture
def km1():
    return ChannelSpec(-1)


# one verdict line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
