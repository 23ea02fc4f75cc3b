# Directory: parallel-ist/tests/conftest.py
"""
Shared fixtures for the interpolation search tree test suite
Slow acceptance-scale tests run only when IST_RUN_SLOW=1
"""

import os

import numpy as np
import pytest

from parallel_ist.configuration import TreeConfig
from parallel_ist.instrumentation import disable_counters


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: acceptance-scale test, enabled with IST_RUN_SLOW=1")


def pytest_collection_modifyitems(config, items):
    if os.getenv("IST_RUN_SLOW") == "1":
        return
    skip_slow = pytest.mark.skip(reason="set IST_RUN_SLOW=1 to run acceptance-scale tests")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def config():
    """Small grain and several workers so every parallel path runs on small inputs"""
    return TreeConfig(grain=8, threads=4, debug=True)


@pytest.fixture
def sequential_config():
    return TreeConfig(grain=8, threads=1, debug=True)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(20240611))


@pytest.fixture(autouse=True)
def _counters_off():
    yield
    disable_counters()
