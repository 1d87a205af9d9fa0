import pytest

from dirac_numerov import Ansatz, PhysicalConfig, SolverSettings, solve_ground_state
from dirac_numerov.numerov import Scheme


@pytest.fixture(scope="session")
def solve_cached():
    """Memoized ground-state solves shared across the whole test run."""
    cache = {}

    def run(dimension, ansatz, scheme=Scheme.CANONICAL, **settings_kwargs):
        key = (dimension, ansatz, scheme, tuple(sorted(settings_kwargs.items())))
        if key not in cache:
            config = PhysicalConfig(dimension=dimension, ell=0, ansatz=ansatz)
            settings = SolverSettings(scheme=scheme, **settings_kwargs)
            cache[key] = solve_ground_state(config, settings)
        return cache[key]

    return run


@pytest.fixture(scope="session")
def ansatz1_config():
    def make(dimension):
        return PhysicalConfig(dimension=dimension, ell=0, ansatz=Ansatz.ONE_OVER_R)

    return make


@pytest.fixture(scope="session")
def ansatz2_config():
    def make(dimension):
        return PhysicalConfig(dimension=dimension, ell=0, ansatz=Ansatz.GENERALIZED)

    return make
