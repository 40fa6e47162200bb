import numpy as np
import pytest

from nanobeam import BeamParams


@pytest.fixture
def ones():
    """All coefficients 1, l = pi, alpha = beta = 1/2."""
    return BeamParams()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
