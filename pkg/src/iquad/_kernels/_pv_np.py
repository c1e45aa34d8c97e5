"""Pure-numpy principal-value quadrature kernels (fallback backend).

Same quadrature as the compiled backend: midpoint weights ``pitch**2`` per
primed sample with either the singular lines excluded (default) or the primed
lattice staggered by half a pitch in both axes.  The per-output-pixel sums
are vectorized but evaluate the defining kernels literally; only
:func:`pv_sum2d` exploits the separable kernel to use matrix products (the
summands are identical, grouped per axis).
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def _axis_kernel(n: int, pitch: float, stagger: bool) -> np.ndarray:
    """K[i, j] = pitch / (x'_j - x_i) with the i = j singularity handled."""
    x = (np.arange(n) - n // 2) * pitch
    if stagger:
        d = (x[None, :] + pitch / 2.0) - x[:, None]
        return pitch / d
    d = x[None, :] - x[:, None]
    with np.errstate(divide="ignore"):
        k = np.where(d != 0.0, pitch / np.where(d == 0.0, 1.0, d), 0.0)
    return k


def pv_sum2d(f: np.ndarray, pitch: float, stagger: bool = False) -> np.ndarray:
    """Raw double sum ``sum f(x',y') pitch^2 / ((x'-x)(y'-y))`` (no 1/pi^2)."""
    k = _axis_kernel(f.shape[0], pitch, stagger)
    return k @ f @ k.T


def pv_i1_direct(phi: np.ndarray, pupil: np.ndarray, pitch: float, stagger: bool = False) -> np.ndarray:
    """sin-difference kernel over the pupil, output masked to the pupil."""
    n = phi.shape[0]
    k = _axis_kernel(n, pitch, stagger)
    out = np.zeros_like(phi)
    ii, kk = np.nonzero(pupil)
    for i, j in zip(ii, kk):
        w = np.outer(k[i], k[j]) * pupil
        out[i, j] = np.sum(np.sin(phi - phi[i, j]) * w)
    return out / np.pi**2


def pv_ilin_direct(phi: np.ndarray, pupil: np.ndarray, pitch: float, stagger: bool = False) -> np.ndarray:
    """Linear-difference kernel over the pupil, output masked to the pupil."""
    n = phi.shape[0]
    k = _axis_kernel(n, pitch, stagger)
    out = np.zeros_like(phi)
    ii, kk = np.nonzero(pupil)
    for i, j in zip(ii, kk):
        w = np.outer(k[i], k[j]) * pupil
        out[i, j] = np.sum((phi - phi[i, j]) * w)
    return out / np.pi**2


def pv_i1p_direct(
    phi: np.ndarray, psi: np.ndarray, pupil: np.ndarray, pitch: float, stagger: bool = False
) -> np.ndarray:
    """cos-weighted difference kernel: the pupil-supported derivative part."""
    n = phi.shape[0]
    k = _axis_kernel(n, pitch, stagger)
    out = np.zeros_like(phi)
    ii, kk = np.nonzero(pupil)
    for i, j in zip(ii, kk):
        w = np.outer(k[i], k[j]) * pupil
        out[i, j] = np.sum(np.cos(phi - phi[i, j]) * (psi - psi[i, j]) * w)
    return out / np.pi**2


def pv_i2_raw(
    phi: np.ndarray,
    pupil: np.ndarray,
    detector: np.ndarray,
    pitch: float,
    stagger: bool = False,
) -> np.ndarray:
    """Raw quadruple-kernel sum with ``cos(phi'-phi'') - 1`` over pupil pairs."""
    n = phi.shape[0]
    k = _axis_kernel(n, pitch, stagger)
    jx, jy = np.nonzero(pupil)
    vals = phi[jx, jy]
    a = np.cos(vals[:, None] - vals[None, :]) - 1.0
    out = np.zeros_like(phi)
    ii, kk = np.nonzero(detector)
    for i, j in zip(ii, kk):
        w = k[i, jx] * k[j, jy]
        out[i, j] = w @ a @ w
    return out / (2.0 * np.pi**4)


def pv_i2p_raw(
    phi: np.ndarray,
    psi: np.ndarray,
    pupil: np.ndarray,
    detector: np.ndarray,
    pitch: float,
    stagger: bool = False,
) -> np.ndarray:
    """Raw quadruple-kernel sum with ``-sin(phi'-phi'')(psi'-psi'')``."""
    n = phi.shape[0]
    k = _axis_kernel(n, pitch, stagger)
    jx, jy = np.nonzero(pupil)
    pv, qv = phi[jx, jy], psi[jx, jy]
    a = np.sin(pv[:, None] - pv[None, :]) * (qv[:, None] - qv[None, :])
    out = np.zeros_like(phi)
    ii, kk = np.nonzero(detector)
    for i, j in zip(ii, kk):
        w = k[i, jx] * k[j, jy]
        out[i, j] = w @ a @ w
    return out / (-2.0 * np.pi**4)
