import numpy as np
import pytest

from basis_learner.dataset import make_dataset


@pytest.fixture
def line_points():
    """Three distinct 1-d points; degree-2 monomials interpolate them."""
    return np.array([[0.0], [1.0], [2.0]])


@pytest.fixture
def toy_regression():
    rng = np.random.default_rng(902)
    X = rng.standard_normal((10, 2))
    y = rng.standard_normal(10)
    return make_dataset(X, y, task="regression")
