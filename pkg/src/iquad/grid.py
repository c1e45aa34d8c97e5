"""Sampling grids, pupil masks and the real/complex field containers.

Conventions
-----------
* Sample ``k`` of an ``n``-point axis sits at coordinate ``(k - n/2) * pitch``,
  so the origin is an actual lattice point (``n`` is even).
* The matching centered frequency axis is ``(k - n/2) / (n * pitch)`` in
  cycles per meter; index ``0`` carries the Nyquist frequency ``-1/(2*pitch)``.
* Arrays are indexed ``values[ix, iy]``: axis 0 is x, axis 1 is y.

All containers are immutable after construction and safe to share between
threads; operations on them are pure functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

__all__ = [
    "Grid",
    "ScalarField",
    "ComplexField",
    "PupilMask",
    "make_grid",
    "circular_pupil",
    "full_detector",
]


@dataclass(frozen=True)
class Grid:
    """Square sampling lattice shared by all fields of one model.

    Parameters
    ----------
    n : int
        Samples per axis; even and >= 8.
    pitch : float
        Physical sample spacing in meters.
    pad_factor : int
        Computational oversize relative to the pupil diameter: a pupil of
        ``d`` samples requires ``pad_factor * d <= n``.
    """

    n: int
    pitch: float
    pad_factor: int = 2

    def __post_init__(self):
        if self.n % 2 != 0 or self.n < 8:
            raise ValueError(f"grid size must be even and >= 8, got {self.n}")
        if self.pitch <= 0:
            raise ValueError(f"pitch must be positive, got {self.pitch}")
        if self.pad_factor < 1:
            raise ValueError(f"pad_factor must be >= 1, got {self.pad_factor}")

    @property
    def coords(self) -> np.ndarray:
        """Centered coordinate axis, ``coords[k] = (k - n/2) * pitch``."""
        return (np.arange(self.n) - self.n // 2) * self.pitch

    @property
    def freqs(self) -> np.ndarray:
        """Centered frequency axis in cycles per meter."""
        return (np.arange(self.n) - self.n // 2) / (self.n * self.pitch)

    @property
    def extent(self) -> float:
        """Physical side length ``n * pitch``."""
        return self.n * self.pitch

    def meshgrid(self):
        """(X, Y) coordinate arrays with ``indexing='ij'``."""
        c = self.coords
        return np.meshgrid(c, c, indexing="ij")

    def fft_freqs(self) -> np.ndarray:
        """Frequency axis in FFT (unshifted) ordering, cycles per meter."""
        return np.fft.fftfreq(self.n, self.pitch)

    @property
    def cell_area(self) -> float:
        return self.pitch * self.pitch


def make_grid(n: int, pitch: float, pad_factor: int = 2) -> Grid:
    """Construct a centered square lattice; rejects odd ``n`` and bad pitch."""
    return Grid(n=int(n), pitch=float(pitch), pad_factor=int(pad_factor))


def _as_array(grid: Grid, values, dtype) -> np.ndarray:
    arr = np.asarray(values, dtype=dtype)
    if arr.shape != (grid.n, grid.n):
        raise ValueError(f"values shape {arr.shape} does not match grid {grid.n}x{grid.n}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("field values must be finite")
    return arr


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Real 2d array on a :class:`Grid` (phases, intensities, meta-intensities)."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = _as_array(self.grid, self.values, np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def norm2(self) -> float:
        """Discrete L2 norm, ``sqrt(sum(v^2) * pitch^2)``."""
        return float(np.sqrt(np.sum(self.values**2) * self.grid.cell_area))

    def inner(self, other: "ScalarField") -> float:
        """Discrete L2 inner product with the pitch^2 cell weight."""
        return float(np.sum(self.values * other.values) * self.grid.cell_area)

    def __add__(self, other):
        return ScalarField(self.grid, self.values + _values_of(other))

    def __sub__(self, other):
        return ScalarField(self.grid, self.values - _values_of(other))

    def __mul__(self, other):
        return ScalarField(self.grid, self.values * _values_of(other))

    __rmul__ = __mul__

    def __neg__(self):
        return ScalarField(self.grid, -self.values)


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Complex 2d array on a :class:`Grid` (fields, OTFs, propagated amplitudes)."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = _as_array(self.grid, self.values, np.complex128)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def intensity(self) -> ScalarField:
        return ScalarField(self.grid, np.abs(self.values) ** 2)


def _values_of(x) -> Union[np.ndarray, float]:
    if isinstance(x, (ScalarField, ComplexField, PupilMask)):
        return x.values if not isinstance(x, PupilMask) else x.indicator
    return x


@dataclass(frozen=True, eq=False)
class PupilMask:
    """Binary indicator of the pupil (kind ``'pupil'``) or detector (``'detector'``).

    ``diameter_samples`` records the nominal disk diameter when the mask was
    built by :func:`circular_pupil`; it fixes the unit-disk mapping used by
    the Zernike sampler.
    """

    grid: Grid
    indicator: np.ndarray = field(repr=False)
    kind: str = "pupil"
    diameter_samples: int = 0

    def __post_init__(self):
        arr = _as_array(self.grid, self.indicator, np.float64)
        if not np.all((arr == 0.0) | (arr == 1.0)):
            raise ValueError("mask indicator must be binary")
        arr.setflags(write=False)
        object.__setattr__(self, "indicator", arr)
        if self.kind not in ("pupil", "detector"):
            raise ValueError(f"unknown mask kind {self.kind!r}")

    @property
    def count(self) -> int:
        """Number of active pixels."""
        return int(self.indicator.sum())

    @property
    def flux(self) -> float:
        """Mask area, ``count * pitch^2``."""
        return self.count * self.grid.cell_area

    def apply(self, f: ScalarField) -> ScalarField:
        return ScalarField(self.grid, f.values * self.indicator)

    def dominates(self, other: "PupilMask") -> bool:
        """True when this mask covers ``other`` pointwise (detector >= pupil)."""
        return bool(np.all(self.indicator >= other.indicator))


def circular_pupil(grid: Grid, diameter_samples: int, kind: str = "pupil") -> PupilMask:
    """Centered hard-edged disk of the given diameter in samples.

    A lattice point belongs to the pupil when its radius in sample units is
    strictly below ``diameter_samples / 2``.  The diameter may not exceed
    ``n / pad_factor``.
    """
    if diameter_samples < 0:
        raise ValueError("diameter must be nonnegative")
    if diameter_samples > grid.n // grid.pad_factor:
        raise ValueError(
            f"pupil diameter {diameter_samples} exceeds n/pad_factor = "
            f"{grid.n // grid.pad_factor}"
        )
    k = np.arange(grid.n) - grid.n // 2
    r2 = k[:, None] ** 2 + k[None, :] ** 2
    ind = (r2 < (diameter_samples / 2.0) ** 2).astype(np.float64)
    return PupilMask(grid, ind, kind=kind, diameter_samples=int(diameter_samples))


def full_detector(grid: Grid) -> PupilMask:
    """Detector covering the whole computational grid (the default D)."""
    return PupilMask(grid, np.ones((grid.n, grid.n)), kind="detector")
