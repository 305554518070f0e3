import os

import numpy as np
import pytest
from hypothesis import Verbosity, settings

# Register test profiles
settings.register_profile("dev", max_examples=10)
settings.register_profile("ci", max_examples=100)
settings.register_profile("debug", max_examples=1000, verbosity=Verbosity.verbose)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "dev"))


def pytest_collection_modifyitems(config, items):
    """Skip benchmark-sized tests unless RUN_SLOW_TESTS=true"""
    if os.getenv("RUN_SLOW_TESTS", "").lower() == "true":
        return
    skip_slow = pytest.mark.skip(reason="set RUN_SLOW_TESTS=true to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
