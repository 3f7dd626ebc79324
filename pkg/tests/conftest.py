import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parents[1]
SRC = ROOT / "src"
for path in (ROOT, SRC):
    if str(path) not in sys.path:
        sys.path.insert(0, str(path))

from att_tomo.discretization import Discretization  # noqa: E402
from att_tomo.fields import BoundaryGrid, PolarGrid  # noqa: E402
from att_tomo.geometry import RayQuadrature  # noqa: E402


@pytest.fixture(scope="session")
def grid() -> PolarGrid:
    return PolarGrid(16, 32)


@pytest.fixture(scope="session")
def bgrid() -> BoundaryGrid:
    return BoundaryGrid(64, 64)


@pytest.fixture(scope="session")
def disc(grid, bgrid) -> Discretization:
    return Discretization(grid=grid, bgrid=bgrid, K=8, n_theta=64, quad=RayQuadrature(2.0 / 64, 4), P=16, N=16)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
