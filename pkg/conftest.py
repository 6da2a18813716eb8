"""Shared pytest setup: the `slow` marker and common fixtures."""

import os

import numpy as np
import pytest

from app.services.rng import generator, standard_normal


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-size reproduction runs; enable with RUN_SLOW=1")


def pytest_collection_modifyitems(config, items):
    if os.getenv("RUN_SLOW") == "1":
        return
    skip = pytest.mark.skip(reason="set RUN_SLOW=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def gaussian():
    """gaussian(stream, *shape) -> seeded standard normal array."""

    def draw(stream: str, *shape, replicate: int = 0) -> np.ndarray:
        return standard_normal(generator(12345, stream, replicate), shape)

    return draw
