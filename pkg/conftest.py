"""
Shared pytest fixtures
"""
import numpy as np
import pytest

from csslearn.detector import EnergyDetectorConfig
from csslearn.scenario import ScenarioConfig


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def detector_cfg():
    return EnergyDetectorConfig(num_samples=10, noise_variance=1.0, pfa_target=0.05)


@pytest.fixture
def small_scenario():
    """Factory for short GSC-sized scenarios"""
    def make(**overrides):
        data = {"preset": "gsc", "num_pus": 4, "num_sus": 6, "steps": 300, "seed": 7}
        data.update(overrides)
        return ScenarioConfig.model_validate(data)
    return make
