import numpy as np
import pytest

from lbsgd.benchmarks import make_chain_cmdp, make_quadratic_linear


@pytest.fixture(scope="session")
def quad2():
    return make_quadratic_linear(2)


@pytest.fixture(scope="session")
def chain():
    # construction runs the regularity sweep; share it across tests
    return make_chain_cmdp()


@pytest.fixture
def rng():
    return np.random.default_rng(0)
