import numpy as np
import pytest

from coopinfer.network import MixingMatrix

# The 4-agent weight matrix of the Bernoulli worked example, typed in literally.
EXAMPLE_A = np.array([
    [2 / 3, 1 / 6, 0, 1 / 6],
    [1 / 6, 2 / 3, 1 / 6, 0],
    [0, 1 / 6, 2 / 3, 1 / 6],
    [1 / 6, 0, 1 / 6, 2 / 3],
])
EXAMPLE_THETAS = (0.2, 0.4, 0.6, 0.8)


@pytest.fixture
def example_a():
    return MixingMatrix(EXAMPLE_A)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
