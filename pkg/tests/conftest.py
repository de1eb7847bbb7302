import math

import numpy as np
import pytest

from lafbf import _backend
from lafbf.synthesis import SynthesisParams, precompute

try:
    from lafbf import _core  # noqa: F401

    BACKENDS = ["python", "cython"]
except ImportError:  # pragma: no cover
    BACKENDS = ["python"]


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


@pytest.fixture(scope="session")
def small_params():
    return SynthesisParams(hurst=0.3, alpha=math.pi / 6, epsilon=0.05, grid_order=15,
                           seed=11, regularized=False)


@pytest.fixture(scope="session")
def small_state(small_params):
    return precompute(small_params)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
