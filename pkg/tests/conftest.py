import os
import sys

import numpy as np
import pytest

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, REPO_ROOT)

import settings  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: exhaustive runs over GN:3 and the witness sweeps")


@pytest.fixture(autouse=True)
def fresh_settings():
    """Every test starts from the built-in defaults, whatever the environment says."""
    settings.load_settings(path=os.path.join(REPO_ROOT, "tests", "no-such-settings.json"), environ={})
    yield
    settings.reset_settings()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def repo_root():
    return REPO_ROOT
