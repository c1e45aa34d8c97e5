"""Zernike modes on a circular pupil, Noll-normalized (unit RMS over the disk)."""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .grid import Grid, PupilMask, ScalarField

__all__ = ["ZernikeIndex", "zernike_mode", "noll_index", "noll_range"]


@dataclass(frozen=True)
class ZernikeIndex:
    """Radial order ``n`` and signed azimuthal order ``m``.

    Valid when ``n >= 0``, ``|m| <= n`` and ``n - |m|`` is even.  Positive
    ``m`` selects the cosine branch, negative ``m`` the sine branch.
    """

    n: int
    m: int

    def __post_init__(self):
        if self.n < 0 or abs(self.m) > self.n or (self.n - abs(self.m)) % 2 != 0:
            raise ValueError(f"invalid Zernike index (n={self.n}, m={self.m})")

    @property
    def is_piston(self) -> bool:
        return self.n == 0 and self.m == 0


def noll_index(j: int) -> ZernikeIndex:
    """Map a Noll index ``j >= 1`` to ``(n, m)`` (j=1 piston, 2/3 tilts, ...)."""
    if j < 1:
        raise ValueError(f"Noll index must be >= 1, got {j}")
    n = 0
    while (n + 1) * (n + 2) // 2 < j:
        n += 1
    p = j - n * (n + 1) // 2  # position within the order, 1-based
    ms = sorted(range(-n, n + 1, 2), key=abs)
    m = ms[p - 1]
    # Noll's sign rule: even j -> cosine (m >= 0), odd j -> sine (m <= 0)
    if m != 0:
        m = abs(m) if j % 2 == 0 else -abs(m)
    return ZernikeIndex(n, m)


def noll_range(j_first: int, j_last: int) -> list[ZernikeIndex]:
    """Noll indices ``j_first..j_last`` inclusive."""
    return [noll_index(j) for j in range(j_first, j_last + 1)]


def _radial(n: int, m: int, rho: np.ndarray) -> np.ndarray:
    out = np.zeros_like(rho)
    for k in range((n - m) // 2 + 1):
        c = (-1) ** k * factorial(n - k) / (
            factorial(k) * factorial((n + m) // 2 - k) * factorial((n - m) // 2 - k)
        )
        out += c * rho ** (n - 2 * k)
    return out


def zernike_mode(grid: Grid, pupil: PupilMask, index: ZernikeIndex, rms: float = 1.0) -> ScalarField:
    """Sample a Noll-normalized Zernike mode on the pupil, scaled to ``rms``.

    The unit disk is mapped onto the pupil support (radius = half the pupil
    diameter in physical units); values outside the pupil are zero.  The
    analytic normalization gives pupil RMS equal to ``rms`` up to pixelization
    error (within 2% for pupil diameters >= 32 samples).
    """
    if pupil.count == 0:
        raise ValueError("pupil is empty")
    n, m = index.n, index.m
    X, Y = grid.meshgrid()
    if pupil.diameter_samples > 0:
        radius = pupil.diameter_samples / 2.0 * grid.pitch
    else:
        # fall back to the mask's row support
        k = np.arange(grid.n) - grid.n // 2
        occupied = k[np.any(pupil.indicator > 0, axis=1)]
        radius = (abs(occupied).max() + 0.5) * grid.pitch
    rho = np.sqrt(X**2 + Y**2) / radius
    theta = np.arctan2(Y, X)
    if index.is_piston:
        z = np.ones_like(rho)
    else:
        r = _radial(n, abs(m), np.minimum(rho, 1.0))
        if m == 0:
            z = np.sqrt(n + 1.0) * r
        elif m > 0:
            z = np.sqrt(2.0 * (n + 1.0)) * r * np.cos(m * theta)
        else:
            z = np.sqrt(2.0 * (n + 1.0)) * r * np.sin(-m * theta)
    return ScalarField(grid, rms * z * pupil.indicator)
