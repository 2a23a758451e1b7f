import math

import pytest
from hypothesis import HealthCheck, settings

from weightcalc.envelope import associated_weight, monomial_coefficients
from weightcalc.weights import Domain, WeightSpec, build_grid, default_grid, log_transform

settings.register_profile(
    "repo",
    derandomize=True,
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")


def make_table(text, domain, grid=None, n_max=None):
    spec = WeightSpec.parse(text, domain)
    grid = grid or default_grid(spec.domain)
    env = monomial_coefficients(spec, log_transform(spec, grid), n_max=n_max)
    return spec, associated_weight(env, grid)


@pytest.fixture(scope="session")
def plane_grid():
    return default_grid(Domain.PLANE)


@pytest.fixture(scope="session")
def disk_grid():
    return default_grid(Domain.DISK)


@pytest.fixture(scope="session")
def exp_table(plane_grid):
    return make_table("exp(r)", "plane", plane_grid)


@pytest.fixture(scope="session")
def small_plane_grid():
    return build_grid(Domain.PLANE, 256, 30.0)
