import numpy as np
import pytest

from fnmix import zoo
from fnmix.chain import spectral_decompose


@pytest.fixture(scope="session")
def two_state():
    return zoo.two_state(0.3)


@pytest.fixture(scope="session")
def indicator():
    return np.array([0.0, 1.0])


@pytest.fixture(scope="session")
def mixture():
    chain, f, meta = zoo.mixture_gibbs_chain()
    return chain, f, meta, spectral_decompose(chain)


@pytest.fixture(scope="session")
def oring():
    chain, f, meta = zoo.oring_mh_chain()
    return chain, f, meta, spectral_decompose(chain)
