import numpy as np
import pytest

from kinescan.kinematics import default_tree
from kinescan.model import MICRO_CONFIG_KWARGS, ModelConfig


def make_rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


@pytest.fixture
def rng():
    return make_rng(0)


@pytest.fixture(scope="session")
def tree():
    return default_tree()


@pytest.fixture
def micro_config():
    return ModelConfig(seed=0, **MICRO_CONFIG_KWARGS)
