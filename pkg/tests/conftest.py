import os
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from ietlab.iet import Iet, make_symmetric_permutation

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=200,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@st.composite
def symmetric_iets(draw, d_min=2, d_max=6, exact=False):
    """Symmetric IETs with lengths bounded away from zero."""
    d = draw(st.integers(d_min, d_max))
    if exact:
        nums = draw(st.lists(st.integers(1, 1000), min_size=d, max_size=d))
        lengths = tuple(Fraction(v, 1000) for v in nums)
    else:
        lengths = tuple(draw(st.lists(st.floats(0.05, 1.0), min_size=d, max_size=d)))
    return Iet(make_symmetric_permutation(d), lengths)


def random_symmetric(seed, d):
    rng = np.random.default_rng(seed)
    e = rng.standard_exponential(d)
    return Iet(make_symmetric_permutation(d), tuple(float(v) for v in e / e.sum()))


@pytest.fixture
def golden():
    from ietlab.iet import golden_rotation
    return golden_rotation()


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
