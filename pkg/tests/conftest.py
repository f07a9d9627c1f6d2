import numpy as np
import pytest

from almost_fuchsian.moebius import bolza_group, enumerate_group
from almost_fuchsian.poincare import default_basis, poincare_basis
from almost_fuchsian.surface import build_sampled_surface


@pytest.fixture(scope="session")
def bolza():
    return bolza_group()


@pytest.fixture(scope="session")
def elements6(bolza):
    return enumerate_group(bolza, 6)


@pytest.fixture(scope="session")
def coarse_surface(bolza):
    return build_sampled_surface(bolza, 16)


@pytest.fixture(scope="session")
def mid_surface(bolza):
    return build_sampled_surface(bolza, 32)


@pytest.fixture(scope="session")
def fine_surface(bolza):
    return build_sampled_surface(bolza, 64)


@pytest.fixture(scope="session")
def coarse_basis(bolza, coarse_surface, elements6):
    return poincare_basis(default_basis(), bolza, 6, coarse_surface, elements6)


@pytest.fixture(scope="session")
def mid_basis(bolza, mid_surface, elements6):
    return poincare_basis(default_basis(), bolza, 6, mid_surface, elements6)


@pytest.fixture(scope="session")
def fine_basis(bolza, fine_surface, elements6):
    return poincare_basis(default_basis(), bolza, 6, fine_surface, elements6)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
