import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qmaxent.spectra import custom

settings.register_profile("qmaxent", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("qmaxent")


@pytest.fixture
def three_level():
    """Equally spaced three-level spectrum {0, 0.5, 1}, unit degeneracies."""
    return custom([(0.0, 1), (0.5, 1), (1.0, 1)])


@pytest.fixture
def two_level():
    return custom([(0.0, 1), (1.0, 1)])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
