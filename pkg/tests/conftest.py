import pytest
from hypothesis import HealthCheck, settings

from fracheat import SpectralGrid, gaussian, mixture

settings.register_profile(
    "suite",
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def grid1() -> SpectralGrid:
    return SpectralGrid.default_for(1)


@pytest.fixture(scope="session")
def unit_gaussian():
    return gaussian()


@pytest.fixture(scope="session")
def mixture_trio():
    # one bare Gaussian, one nonnegative two-bump, one sign-indefinite
    return (
        gaussian(),
        mixture([1.0, 0.5], [0.0, 1.2], [1.0, 2.5]),
        mixture([0.8, -0.3], [-0.5, 0.7], [1.5, 0.6]),
    )
