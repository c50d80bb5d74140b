import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from core.flags import flags  # noqa: E402


@pytest.fixture(autouse=True)
def clear_flags():
    flags.clear()
    yield
    flags.clear()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
