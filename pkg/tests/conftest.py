import numpy as np
import pytest

from structsynth.bench import profile_candidate, profile_field, stairs_field
from structsynth.config import SolverParams
from structsynth.heightfield import HeightField
from structsynth.pipeline import analyse


@pytest.fixture
def params():
    return SolverParams()


def step_field(high: float, width: int = 60, height: int = 40, at: int = 30) -> HeightField:
    """High plateau for x < at, ground 0 beyond."""
    z = np.zeros((height, width))
    z[:, :at] = high
    return HeightField(z)


@pytest.fixture
def step16():
    return step_field(16.0)


@pytest.fixture
def stairs():
    return stairs_field()


def profile_setup(profile, p):
    f = profile_field(profile)
    m = analyse(f, p)
    return f, m, profile_candidate(m)


ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def acceptance_log(request):
    return request.config.stash.setdefault(ACCEPTANCE, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
