import numpy as np
import pytest

from otfs_jrc import FrameConfig


@pytest.fixture
def desk_config() -> FrameConfig:
    return FrameConfig(m_bins=64, n_bins=16, scs_hz=30e3, fc_hz=29e9)


@pytest.fixture
def small_config() -> FrameConfig:
    return FrameConfig(m_bins=16, n_bins=8, scs_hz=30e3, fc_hz=29e9)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
