import numpy as np
import pytest

from finslercheck import catalogue
from finslercheck.calculus import TangentSample
from finslercheck.sampling import tangent_samples


@pytest.fixture(scope="session")
def euclid3():
    return catalogue.entry("euclidean", n=3)


@pytest.fixture(scope="session")
def klein3():
    return catalogue.entry("klein", n=3)


@pytest.fixture(scope="session")
def funk3():
    return catalogue.entry("funk_parallel", n=3, a=(0.5, 0.1, 0.0))


@pytest.fixture(scope="session")
def classic3():
    return catalogue.entry("berwald_classic", n=3)


@pytest.fixture(scope="session")
def gb3():
    return catalogue.entry("general_berwald", n=3, a=(0.1, 0.05, 0.0))


@pytest.fixture(scope="session")
def samples10():
    return tangent_samples(3, 10, seed=101)


@pytest.fixture(scope="session")
def samples20():
    return tangent_samples(3, 20, seed=202)


def e1_sample():
    return TangentSample((0.0, 0.0, 0.0), (1.0, 0.0, 0.0))


@pytest.fixture
def origin_e1():
    return e1_sample()


def rel_err(got, want):
    got = np.asarray(got, dtype=float)
    want = np.asarray(want, dtype=float)
    scale = max(1.0, float(np.max(np.abs(want))))
    return float(np.max(np.abs(got - want))) / scale
