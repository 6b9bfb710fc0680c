import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from convspec import BoundaryCoefficients, Grid

settings.register_profile(
    "default", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

BC_SET = [
    BoundaryCoefficients(0, 0),
    BoundaryCoefficients(0, 1),
    BoundaryCoefficients(1, -0.5),
    BoundaryCoefficients(1j, 0.3),
]


def small_complex(bound=2.0):
    part = st.floats(-bound, bound, allow_nan=False, allow_infinity=False)
    return st.builds(complex, part, part)


def sample_arrays(size):
    part = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
    return st.lists(st.builds(complex, part, part), min_size=size, max_size=size).map(np.array)


@pytest.fixture(scope="session")
def grid512():
    return Grid(512)


@pytest.fixture(scope="session")
def grid128():
    return Grid(128)


def max_err(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


PI = math.pi
