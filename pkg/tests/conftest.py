import numpy as np
import pytest

from akenmotsu.model_catalog import LieGroupModelParams, build_model


def model(n, alpha, lambdas):
    return build_model(LieGroupModelParams(n, alpha, tuple(lambdas)))


def at_t(S, t=0.0):
    """Chart point with time coordinate ``t`` and all other coordinates zero."""
    x = np.zeros(S.dim)
    x[0] = t
    return S.chart.point(x)


@pytest.fixture(scope="session")
def lam2():
    return model(1, 1.0, [2.0])


@pytest.fixture(scope="session")
def lam1():
    return model(1, 1.0, [1.0])


@pytest.fixture(scope="session")
def lam0():
    return model(1, 1.0, [0.0])


@pytest.fixture(scope="session")
def mixed():
    return model(2, 1.0, [1.0, 2.0])


@pytest.fixture(scope="session")
def kmu22():
    return model(2, 1.0, [2.0, 2.0])


@pytest.fixture
def samples():
    def make(S, count=6, seed=42):
        return S.chart.sample(count, seed)

    return make
