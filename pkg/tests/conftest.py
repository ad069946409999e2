"""
Shared fixtures for the test suite.
"""
import sys
import os

import pytest

# Add repository root to Python path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.forest.params import DistanceConfig  # noqa: E402
from tests.helpers import MIXED_DISTANCES, make_mixed_dataset  # noqa: E402


@pytest.fixture
def mixed_dataset():
    return make_mixed_dataset()


@pytest.fixture
def mixed_config():
    return DistanceConfig(features=MIXED_DISTANCES)
