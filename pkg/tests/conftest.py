import numpy as np
import pytest

from histotet import Tetrahedron


def make_random_tet(rng, min_volume=0.01):
    """Random nondegenerate tetrahedron with vertices inside the unit cube."""
    while True:
        v = rng.random((4, 3))
        if abs(np.linalg.det(v[1:] - v[0])) / 6.0 >= min_volume:
            return Tetrahedron(v)


@pytest.fixture
def rng():
    return np.random.default_rng(20250811)
