import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from maxfilter_lab import build_family, generate_group

settings.register_profile(
    "suite",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def c3():
    return build_family("cyclic_rotation_2d", 3)


@pytest.fixture(scope="session")
def c5():
    return build_family("cyclic_rotation_2d", 5)


@pytest.fixture(scope="session")
def pm2():
    return build_family("plus_minus_id", 2)


@pytest.fixture(scope="session")
def sf2():
    return build_family("sign_flips", 2)


@pytest.fixture(scope="session")
def sf3():
    return build_family("sign_flips", 3)


@pytest.fixture(scope="session")
def perm3():
    return build_family("permutations", 3)


@pytest.fixture(scope="session")
def dih4():
    return build_family("dihedral_2d", 4)


@pytest.fixture(scope="session")
def trivial2():
    """Order-1 group on the plane."""
    return generate_group([np.eye(2)])


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
