import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cpscausal.fixtures import get_fixture


@pytest.fixture(scope="session")
def stage1():
    return get_fixture("stage1")


@pytest.fixture(scope="session")
def stage1_learnt():
    return get_fixture("stage1_learnt")


@pytest.fixture(scope="session")
def stage6():
    return get_fixture("stage6")


@pytest.fixture(scope="session")
def twostage():
    return get_fixture("twostage")


@pytest.fixture(scope="session")
def repo_root() -> Path:
    return Path(__file__).parent.parent
