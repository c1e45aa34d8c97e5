"""The compiled kernels and the numpy fallback must agree to rounding:
same quadrature nodes and weights, different loop organization."""

import numpy as np
import pytest

from iquad._kernels import available_backends, get_backend

pytestmark = pytest.mark.skipif(
    "cython" not in available_backends(), reason="compiled extension not built"
)


@pytest.fixture
def args(rng):
    n = 12
    phi = rng.standard_normal((n, n))
    psi = rng.standard_normal((n, n))
    k = np.arange(n) - n // 2
    pupil = ((k[:, None] ** 2 + k[None, :] ** 2) < 9.0).astype(float)
    detector = np.ones((n, n))
    return phi, psi, pupil, detector


@pytest.mark.parametrize("stagger", [False, True])
def test_pv_sum2d(args, stagger):
    phi = args[0]
    a = get_backend("python").pv_sum2d(phi, 0.7, stagger)
    b = get_backend("cython").pv_sum2d(phi, 0.7, stagger)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12 * np.abs(a).max())


@pytest.mark.parametrize("stagger", [False, True])
def test_pv_i1_direct(args, stagger):
    phi, _, pupil, _ = args
    a = get_backend("python").pv_i1_direct(phi, pupil, 0.7, stagger)
    b = get_backend("cython").pv_i1_direct(phi, pupil, 0.7, stagger)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12 * np.abs(a).max())


def test_pv_ilin_direct(args):
    phi, _, pupil, _ = args
    a = get_backend("python").pv_ilin_direct(phi, pupil, 0.7, False)
    b = get_backend("cython").pv_ilin_direct(phi, pupil, 0.7, False)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12 * np.abs(a).max())


def test_pv_i1p_direct(args):
    phi, psi, pupil, _ = args
    a = get_backend("python").pv_i1p_direct(phi, psi, pupil, 0.7, False)
    b = get_backend("cython").pv_i1p_direct(phi, psi, pupil, 0.7, False)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12 * np.abs(a).max())


def test_pv_i2_raw(args):
    phi, _, pupil, detector = args
    a = get_backend("python").pv_i2_raw(phi, pupil, detector, 0.7, False)
    b = get_backend("cython").pv_i2_raw(phi, pupil, detector, 0.7, False)
    np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-12 * max(np.abs(a).max(), 1e-300))


def test_pv_i2p_raw(args):
    phi, psi, pupil, detector = args
    a = get_backend("python").pv_i2p_raw(phi, psi, pupil, detector, 0.7, False)
    b = get_backend("cython").pv_i2p_raw(phi, psi, pupil, detector, 0.7, False)
    np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-12 * max(np.abs(a).max(), 1e-300))
