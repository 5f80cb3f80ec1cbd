import os
import sys

import numpy as np
import pytest

# Add src directory to path for imports
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..", "src")))

from soliton_surfaces.cpn_model import veronese_chain  # noqa: E402
from soliton_surfaces.surface_io import GridSpec  # noqa: E402


@pytest.fixture(scope="session")
def cp1():
    """Veronese chain of CP^1, f0 = (1, z)."""
    return veronese_chain(2)


@pytest.fixture(scope="session")
def cp2():
    return veronese_chain(3)


@pytest.fixture(scope="session")
def points():
    """Seeded sample points (x, y, t) away from z = 0 and |z| = 1."""
    rng = np.random.default_rng(1234)
    r = rng.uniform(0.2, 2.5, 12)
    r = r[np.abs(r - 1.0) > 0.05]
    phi = rng.uniform(0.0, 2 * np.pi, len(r))
    t = rng.choice([0.5, 1.0, 2.0], len(r))
    return r * np.cos(phi), r * np.sin(phi), t


@pytest.fixture
def small_grid():
    return GridSpec(-2.0, 2.0, -2.0, 2.0, 9, 9)


@pytest.fixture(scope="session", params=[2, pytest.param(3, marks=pytest.mark.slow)], ids=["cp1", "cp2"])
def chain(request):
    """Veronese chains of CP^1 and CP^2 (the latter only with -m slow)."""
    return veronese_chain(request.param)
