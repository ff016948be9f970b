import numpy as np
import pytest

from fpme.oplib import build_weights


@pytest.fixture(scope="session")
def table_half():
    """s = 0.5, h = 1/16: the workhorse table shared across tests."""
    return build_weights(0.5, 1.0 / 16)


@pytest.fixture(scope="session")
def unit_tables():
    """h = 1 tables for the three canonical orders."""
    return {s: build_weights(s, 1.0) for s in (0.25, 0.5, 0.75)}


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
