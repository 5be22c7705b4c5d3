import os

import numpy as np
import pytest
from django.conf import settings

from network.case_io import read_case


def case_path(name: str) -> str:
    return os.path.join(settings.GRIDFLOW['CASE_DIR'], name)


def require_case(name: str) -> str:
    path = case_path(name)
    if not os.path.isfile(path):
        pytest.skip(f"{name} is not bundled in {settings.GRIDFLOW['CASE_DIR']}")
    return path


@pytest.fixture(scope="session")
def case2_text():
    with open(case_path("case2.m"), "r", encoding="utf-8") as f:
        return f.read()


@pytest.fixture(scope="session")
def case2():
    return read_case(case_path("case2.m"))


@pytest.fixture(scope="session")
def case30_text():
    with open(case_path("case30.m"), "r", encoding="utf-8") as f:
        return f.read()


@pytest.fixture(scope="session")
def case30():
    return read_case(case_path("case30.m"))


@pytest.fixture(scope="session")
def case118():
    return read_case(require_case("case118.m"))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
