import os
import sys

import hypothesis
import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from mobility.corr import MarkovModel, build_model  # noqa: E402
from mobility.geo import Dataset, Grid, Role, Trajectory  # noqa: E402
from mobility.synth import random_mobility_model, synth_generate  # noqa: E402
from utils.logs import logger  # noqa: E402

np.seterr(all="warn")

hypothesis.settings.register_profile("fast", max_examples=25, deadline=None)
hypothesis.settings.register_profile("debugger", report_multiple_bugs=False, deadline=None)
hypothesis.settings.register_profile("thorough", max_examples=1000, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "fast"))

# brute-force oracle comparisons run this many random instances under every profile
ORACLE_EXAMPLES = 1000

logger.configure(level="WARNING", console_output=False)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def grid10():
    return Grid(n=10, x_max=10.0, y_max=10.0)


@pytest.fixture(scope="session")
def grid30():
    return Grid(n=30)


@pytest.fixture(scope="session")
def moore10(grid10):
    return MarkovModel.uniform_moore(grid10)


@pytest.fixture(scope="session")
def generating10(grid10):
    return random_mobility_model(grid10, np.random.default_rng(7))


@pytest.fixture(scope="session")
def public10(generating10):
    return build_model(synth_generate(generating10, 200, 40, np.random.default_rng(8), prefix="public"))


@pytest.fixture(scope="session")
def dataset10(generating10):
    return synth_generate(generating10, 12, 30, np.random.default_rng(9))


def traj(cells, role=Role.RAW, traj_id="t"):
    return Trajectory(traj_id, role, tuple(cells))


def dataset(grid, trajectories):
    return Dataset(grid, list(trajectories))
