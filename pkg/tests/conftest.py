import pytest

from rscap.solver import SolverConfig


@pytest.fixture(scope="session")
def cfg():
    return SolverConfig()
