import numpy as np
import pytest

from hyperflow.catalog import CATALOG
from hyperflow.lorentz import OrthonormalFrame, orthonormalize_frame

CATALOG_NAMES = sorted(CATALOG)
MOVING_NAMES = [n for n in CATALOG_NAMES if n != "ambient_h3"]


def random_admissible_frame(rng: np.random.Generator, m: int) -> OrthonormalFrame:
    """A random admissible frame built from a guaranteed-timelike seed set."""
    vecs = [rng.normal(size=m + 1) for _ in range(m)]
    u = 0.8 * rng.normal(size=m)
    vecs.append(np.append(u, np.sqrt(1.0 + u @ u)))
    return orthonormalize_frame(vecs)


@pytest.fixture
def rng():
    return np.random.default_rng(20250810)


@pytest.fixture(params=CATALOG_NAMES)
def catalog_entry(request):
    return request.param, CATALOG[request.param]
