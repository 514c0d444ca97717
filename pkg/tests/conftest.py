import pytest

from injectsim import CouplingParams, SimConfig, table1_params


@pytest.fixture(scope="session")
def p():
    return table1_params()


@pytest.fixture(scope="session")
def cfg(p):
    return SimConfig(master=p, slave=p, coupling=CouplingParams(kappa_ex=1e10))


@pytest.fixture(scope="session")
def cfg_uncoupled(p):
    return SimConfig(master=p, slave=p, coupling=CouplingParams(kappa_ex=0.0))
