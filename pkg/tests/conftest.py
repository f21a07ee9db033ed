import numpy as np
import pytest

from ppmhd.state import GAMMA, to_conserved


def random_primitive(rng, rho=(0.1, 3.0), p=(0.01, 3.0), u=1.5, b=1.5):
    return np.array([
        rng.uniform(*rho), *rng.normal(0.0, u, 3), rng.uniform(*p), *rng.normal(0.0, b, 3),
    ])


def random_conserved(rng, **kw):
    return to_conserved(random_primitive(rng, **kw), GAMMA)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
