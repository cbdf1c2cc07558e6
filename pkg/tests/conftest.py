import numpy as np
import pytest

from rdlab import RadarConfig, Target


@pytest.fixture
def cfg():
    """Default 77 GHz victim configuration."""
    return RadarConfig()


@pytest.fixture
def single_target():
    return Target(range_m=30.0, radial_velocity_mps=10.0, rcs_m2=10.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
