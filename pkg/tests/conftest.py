import numpy as np
import pytest

from binodal.material import MaterialParams


@pytest.fixture
def p1():
    """Running example d1 = 1, d2 = 3 with mu = 1."""
    return MaterialParams(1.0, 1.0, 3.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def random_admissible(rng, n, det_range=(0.5, 4.0)):
    """Random 2x2 matrices with determinant in ``det_range``."""
    out = []
    while len(out) < n:
        F = rng.uniform(-2.5, 2.5, size=(2, 2))
        d = np.linalg.det(F)
        if det_range[0] <= d <= det_range[1]:
            out.append(F)
    return out
