import numpy as np
import pytest

from QLame.bethe import BetheSolver
from QLame.difference_operator import SampleSet
from QLame.elliptic import ModularData
from QLame.family import make_L, make_N


def pytest_addoption(parser):
    """Add the --slow command-line option."""
    parser.addoption(
        "--slow",
        action="store_true",
        default=False,
        help="run Bethe continuation, curve fits and full CLI runs",
    )


def pytest_configure(config):
    """Register the 'slow' marker."""
    config.addinivalue_line("markers", "slow: mark test as slow (Bethe solves, curve fits)")


def pytest_collection_modifyitems(config, items):
    """Skip slow tests by default unless --slow is given."""
    run_slow = config.getoption("--slow")

    skip_slow_marker = pytest.mark.skip(reason="need --slow option to run")

    for item in items:
        if "slow" in item.keywords and not run_slow:
            item.add_marker(skip_slow_marker)


@pytest.fixture(scope="session")
def modular_data() -> ModularData:
    """gamma = sqrt(2)/10, tau = i."""
    return ModularData()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


@pytest.fixture(params=[1, 2, 3])
def m(request) -> int:
    return request.param


@pytest.fixture
def samples_for(modular_data):
    """Factory for guarded sample sets avoiding the poles of the given operators."""

    def make(*operators, avoid=(), count=50, seed=0):
        return SampleSet.generate(modular_data, count, seed, operators=operators, avoid=avoid)

    return make


@pytest.fixture
def lame_samples(modular_data, m):
    return SampleSet.generate(modular_data, 50, 0, operators=[make_L(m, modular_data), make_N(m, modular_data)])


@pytest.fixture(scope="session")
def solved_points(modular_data):
    """Bethe points for m = 1 at c = 0.3 and for m = 2 at c = 0.25, keyed by m."""
    return {m: BetheSolver(m, modular_data).solve_given_c(c) for m, c in ((1, 0.3), (2, 0.25))}
