import numpy as np
import pytest

from iquad.grid import ScalarField, circular_pupil, full_detector, make_grid
from iquad.sensors import iquad_spec


@pytest.fixture
def grid64():
    return make_grid(64, 1e-3, 2)


@pytest.fixture
def pupil64(grid64):
    return circular_pupil(grid64, 32)


@pytest.fixture
def spec64(pupil64):
    return iquad_spec(pupil64)


@pytest.fixture
def grid16():
    return make_grid(16, 4e-3, 2)


@pytest.fixture
def pupil16(grid16):
    return circular_pupil(grid16, 8)


@pytest.fixture
def detector16(grid16):
    return full_detector(grid16)


def smooth_phase(grid, amplitude=0.3):
    """Band-limited deterministic test phase (>= 8 samples per cycle at n=16)."""
    x = grid.coords
    ext = grid.extent
    X, Y = np.meshgrid(x, x, indexing="ij")
    vals = np.sin(2 * np.pi * X / ext) * np.cos(2 * np.pi * 2 * Y / ext) + 0.5 * np.cos(
        2 * np.pi * (X - Y) / ext
    )
    return ScalarField(grid, amplitude * vals)


@pytest.fixture
def phase64(grid64):
    return smooth_phase(grid64)


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def rand_field(grid, rng, scale=1.0):
    return ScalarField(grid, scale * rng.standard_normal((grid.n, grid.n)))
