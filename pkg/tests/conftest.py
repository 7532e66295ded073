import numpy as np
import pytest

from src.behaviour import Scenario
from src.generators import fully_mixed, isotropic, pr_box_2d

SQRT2 = np.sqrt(2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def chsh_scenario():
    return Scenario(2, 2, 2, 2)


@pytest.fixture
def pr_box():
    return pr_box_2d(2)


@pytest.fixture
def mixed_2222(chsh_scenario):
    return fully_mixed(chsh_scenario)


@pytest.fixture
def tsirelson_box(pr_box):
    """Isotropic PR box at visibility 1/sqrt(2)."""
    return isotropic(pr_box, 1 / SQRT2)
