import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from jacobi_lt.operator import PerturbationSpec

settings.register_profile(
    "default",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def complex_in_disk(radius=2.0):
    return st.builds(
        lambda r, t: radius * math.sqrt(r) * complex(math.cos(t), math.sin(t)),
        st.floats(0, 1),
        st.floats(0, 2 * math.pi),
    )


@st.composite
def perturbations(draw, max_width=5, radius=2.0, offsets=(-4, 4)):
    w = draw(st.integers(1, max_width))
    vals = [draw(st.lists(complex_in_disk(radius), min_size=w, max_size=w)) for _ in range(3)]
    return PerturbationSpec(draw(st.integers(*offsets)), *vals)


@st.composite
def off_band_points(draw, min_dist=0.05):
    x = draw(st.floats(-5, 5))
    y = draw(st.floats(-4, 4))
    lam = complex(x, y)
    d = abs(y) if abs(x) <= 2 else math.hypot(abs(x) - 2, y)
    if d < min_dist:
        lam = complex(x, math.copysign(min_dist, y if y else 1.0) + y)
    return lam


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
