import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from granular_kinetics import kernels

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=100, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(params=kernels.backends(), ids=lambda mod: mod.BACKEND)
def backend(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
