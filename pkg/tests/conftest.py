import numpy as np
import pytest

from fticalc.canon import PolynomialEnumeration


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def enum():
    return PolynomialEnumeration(seed=0)
