import pytest

from intervaldyn import catalog


@pytest.fixture(scope="session")
def logistic4():
    return catalog.logistic(4)


@pytest.fixture(scope="session")
def logistic32():
    return catalog.logistic("16/5")


@pytest.fixture(scope="session")
def tent2():
    return catalog.tent(2)


@pytest.fixture(scope="session")
def doubling_map():
    return catalog.doubling()


@pytest.fixture(scope="session")
def bimodal_map():
    return catalog.bimodal()


@pytest.fixture(scope="session")
def feigenbaum_map():
    return catalog.logistic_feigenbaum()


@pytest.fixture(scope="session")
def lorenz_map():
    return catalog.lorenz()
