import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from causalcodes.code import CodeSpec  # noqa: E402
from causalcodes.params import DESK_SCALE, derive_erase_params, derive_flip_params  # noqa: E402


@pytest.fixture(scope="session")
def full_flip():
    return derive_flip_params(40000, eps=0.08, p_prime=0.125)


@pytest.fixture(scope="session")
def desk_flip():
    return derive_flip_params(64, 0.0625, 0.1, DESK_SCALE, {"num_chunks": 8, "R": 4 / 64, "S": 1 / 64})


@pytest.fixture(scope="session")
def desk_flip_spec(desk_flip):
    return CodeSpec.from_params(desk_flip, 12345)


@pytest.fixture(scope="session")
def desk_erase():
    return derive_erase_params(64, 0.25, 0.25, DESK_SCALE, {"R": 4 / 64, "S": 1 / 64})


@pytest.fixture(scope="session")
def desk_erase_spec(desk_erase):
    return CodeSpec.from_params(desk_erase, 99)
