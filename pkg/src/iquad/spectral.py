"""Spectral operators: 2d/1d finite Hilbert transforms, the Sobolev embedding
adjoint, and modulation, all as frequency multipliers on the periodic grid.

The 2d transform with kernel ``1/(pi^2 (x'-x)(y'-y))`` acts as the multiplier
``-sgn(xi) sgn(eta)``; the 1d transform with kernel ``1/(pi (x'-x))`` acts as
``i sgn(xi)`` (numpy forward-FFT sign convention).  ``sgn`` vanishes at the
zero frequency *and* on the Nyquist line: the principal value assigns no
preferred sign on those singular lines, and zeroing them keeps the transform
real-preserving.  Consequently ``H(H(f))`` equals the projector that removes
those lines rather than the identity.

The grid is treated as periodic throughout; sensor-level callers keep the
pupil inside ``n/pad_factor`` samples so kernel wraparound stays below the
quadrature tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Union

import numpy as np

from .grid import ComplexField, Grid, ScalarField

__all__ = [
    "Multiplier",
    "ModulationWeight",
    "fft2",
    "ifft2",
    "hilbert2d",
    "hilbert1d_along_x",
    "hilbert1d_along_y",
    "off_axis_projector",
    "sobolev_adjoint",
    "hilbert_multiplier",
    "embedding_multiplier",
    "delta_weight",
    "tent_weight",
    "modulated_hilbert2d",
]

AnyField = Union[ScalarField, ComplexField]


# ---------------------------------------------------------------------------
# multipliers (internal arrays are in fft ordering; cached per grid)

@lru_cache(maxsize=64)
def _sign_axis(n: int, pitch: float) -> np.ndarray:
    xi = np.fft.fftfreq(n, pitch)
    s = np.sign(xi)
    s[n // 2] = 0.0  # Nyquist
    s.setflags(write=False)
    return s


@lru_cache(maxsize=64)
def _hilbert_mult(grid: Grid) -> np.ndarray:
    s = _sign_axis(grid.n, grid.pitch)
    m = -np.outer(s, s)
    m.setflags(write=False)
    return m


@lru_cache(maxsize=64)
def _offaxis_mult(grid: Grid) -> np.ndarray:
    s = np.abs(_sign_axis(grid.n, grid.pitch))
    m = np.outer(s, s)
    m.setflags(write=False)
    return m


@lru_cache(maxsize=64)
def _embedding_mult(grid: Grid, s: float) -> np.ndarray:
    # angular-frequency convention: xi, eta enter as 2*pi*(cycles per meter)
    w = 2.0 * np.pi * np.fft.fftfreq(grid.n, grid.pitch)
    m = (1.0 + w[:, None] ** 2 + w[None, :] ** 2) ** (-s)
    m.setflags(write=False)
    return m


@dataclass(frozen=True, eq=False)
class Multiplier:
    """A frequency multiplier in centered ordering, for inspection and I/O."""

    grid: Grid
    values: np.ndarray = field(repr=False)


def hilbert_multiplier(grid: Grid) -> Multiplier:
    """``-sgn(xi) sgn(eta)`` on the centered frequency lattice."""
    return Multiplier(grid, np.fft.fftshift(_hilbert_mult(grid)).astype(np.complex128))


def embedding_multiplier(grid: Grid, s: float) -> Multiplier:
    """``(1 + xi^2 + eta^2)^(-s)`` with angular frequencies, centered."""
    _check_s(s)
    return Multiplier(grid, np.fft.fftshift(_embedding_mult(grid, float(s))).astype(np.complex128))


def _check_s(s: float) -> None:
    if not (1.0 < s < 2.0):
        raise ValueError(f"Sobolev index must lie in (1, 2), got {s}")


# ---------------------------------------------------------------------------
# transforms

def fft2(f: ComplexField) -> ComplexField:
    """Unitary 2d DFT (norm split symmetrically between directions)."""
    return ComplexField(f.grid, np.fft.fft2(f.values, norm="ortho"))


def ifft2(f: ComplexField) -> ComplexField:
    """Unitary inverse of :func:`fft2`."""
    return ComplexField(f.grid, np.fft.ifft2(f.values, norm="ortho"))


def _apply_mult(values: np.ndarray, mult: np.ndarray) -> np.ndarray:
    return np.fft.ifft2(mult * np.fft.fft2(values))


def _wrap_like(f: AnyField, out: np.ndarray) -> AnyField:
    if isinstance(f, ScalarField):
        return ScalarField(f.grid, out.real)
    return ComplexField(f.grid, out)


def hilbert2d(f: AnyField) -> AnyField:
    """2d finite Hilbert transform via the ``-sgn sgn`` multiplier.

    Real input gives real output (up to roundoff); a :class:`ScalarField`
    input is returned as a :class:`ScalarField`.
    """
    return _wrap_like(f, _apply_mult(np.asarray(f.values, dtype=np.complex128), _hilbert_mult(f.grid)))


def hilbert2d_values(grid: Grid, values: np.ndarray) -> np.ndarray:
    """Array-level :func:`hilbert2d` for real input (hot path, no wrapping)."""
    return np.fft.ifft2(_hilbert_mult(grid) * np.fft.fft2(values)).real


def off_axis_projector(f: AnyField) -> AnyField:
    """Project onto the subspace where the Hilbert multiplier has modulus one.

    Zeroes the ``xi = 0``, ``eta = 0`` and Nyquist frequency lines; on this
    subspace ``hilbert2d`` is an involution and an isometry.
    """
    return _wrap_like(f, _apply_mult(np.asarray(f.values, dtype=np.complex128), _offaxis_mult(f.grid)))


def _hilbert1d(values: np.ndarray, grid: Grid, axis: int) -> np.ndarray:
    s = _sign_axis(grid.n, grid.pitch)
    shape = [1, 1]
    shape[axis] = grid.n
    mult = (1j * s).reshape(shape)
    return np.fft.ifft(mult * np.fft.fft(values, axis=axis), axis=axis)


def hilbert1d_along_x(f: ScalarField) -> ScalarField:
    """1d transform in x at each fixed y: multiplier ``i sgn(xi)``, matching
    the kernel ``1/(pi (x'-x))`` (so ``cos -> -sin`` and ``sin -> cos``)."""
    return ScalarField(f.grid, _hilbert1d(f.values.astype(np.complex128), f.grid, axis=0).real)


def hilbert1d_along_y(f: ScalarField) -> ScalarField:
    """1d transform in y at each fixed x; see :func:`hilbert1d_along_x`."""
    return ScalarField(f.grid, _hilbert1d(f.values.astype(np.complex128), f.grid, axis=1).real)


def sobolev_adjoint(f: ScalarField, s: float = 11.0 / 6.0) -> ScalarField:
    """Adjoint of the H^s -> L^2 embedding: multiplier ``(1+xi^2+eta^2)^(-s)``.

    Frequencies are angular (2*pi times cycles per meter).  The multiplier is
    real, positive, equal to one only at DC, hence the map is self-adjoint,
    positive and strictly contracting on mean-free fields.  The documented
    default ``s = 11/6`` is the smoothness of Kolmogorov-turbulent phases.
    """
    _check_s(s)
    out = _apply_mult(f.values.astype(np.complex128), _embedding_mult(f.grid, float(s)))
    return ScalarField(f.grid, out.real)


# ---------------------------------------------------------------------------
# modulation

@dataclass(frozen=True, eq=False)
class ModulationWeight:
    """Focal-plane modulation weighting sampled on the centered frequency lattice.

    ``w`` is nonnegative, normalized so ``sum(w) * pitch^2 = 1`` and symmetric
    under reflection of each frequency axis (which implies the point symmetry
    of the physical modulation path and keeps the modulated multiplier odd in
    each axis, so constant fields stay annihilated).
    """

    grid: Grid
    w: np.ndarray = field(repr=False)
    profile: str = "custom"
    radius: float = 0.0

    def __post_init__(self):
        arr = np.asarray(self.w, dtype=np.float64)
        if arr.shape != (self.grid.n, self.grid.n):
            raise ValueError("weight shape does not match grid")
        if np.any(arr < 0):
            raise ValueError("modulation weight must be nonnegative")
        total = arr.sum() * self.grid.cell_area
        if total <= 0:
            raise ValueError("modulation weight must have positive mass")
        arr = arr / total
        for axis in (0, 1):
            if not np.allclose(arr, _reflect_axis(arr, axis), rtol=0, atol=1e-12 * arr.max()):
                raise ValueError("modulation weight must be symmetric in each frequency axis")
        arr.setflags(write=False)
        object.__setattr__(self, "w", arr)
        mult = _modulated_mult(self.grid, arr)
        mult.setflags(write=False)
        object.__setattr__(self, "_multiplier", mult)

    @property
    def multiplier(self) -> np.ndarray:
        """Modulated Hilbert multiplier in fft ordering (read-only)."""
        return self._multiplier


def _reflect_axis(a: np.ndarray, axis: int) -> np.ndarray:
    # centered index k -> n-k (index 0, the Nyquist sample, is self-paired)
    idx = (-np.arange(a.shape[axis])) % a.shape[axis]
    return np.take(a, idx, axis=axis)


def _modulated_mult(grid: Grid, w_centered: np.ndarray) -> np.ndarray:
    """Circular convolution of the Hilbert multiplier with the weight.

    Normalized so that a centered-delta weight reproduces the unmodulated
    multiplier exactly; the convolution averages the quadrant signs over the
    modulation footprint.
    """
    m = _hilbert_mult(grid)
    wf = np.fft.ifftshift(w_centered)
    conv = np.fft.ifft2(np.fft.fft2(m) * np.fft.fft2(wf)).real
    return conv / wf.sum()


def delta_weight(grid: Grid) -> ModulationWeight:
    """Unmodulated limit: all weight in the central frequency cell."""
    w = np.zeros((grid.n, grid.n))
    w[grid.n // 2, grid.n // 2] = 1.0
    return ModulationWeight(grid, w, profile="delta", radius=0.0)


def tent_weight(grid: Grid, radius_cycles: float) -> ModulationWeight:
    """Radial tent profile of the given radius in cycles per meter.

    One diffraction width (lambda/D) corresponds to ``1/D_pupil`` cycles per
    meter for a pupil of physical diameter ``D_pupil``.
    """
    if radius_cycles <= 0:
        raise ValueError("tent radius must be positive")
    fx = grid.freqs
    r = np.sqrt(fx[:, None] ** 2 + fx[None, :] ** 2)
    w = np.clip(1.0 - r / radius_cycles, 0.0, None)
    if w.sum() == 0:
        raise ValueError("tent radius below frequency resolution; use delta_weight")
    return ModulationWeight(grid, w, profile="tent", radius=float(radius_cycles))


def modulated_hilbert2d(f: AnyField, weight: ModulationWeight) -> AnyField:
    """Hilbert transform with the kernel reweighted by the modulation.

    Applies the multiplier built by convolving ``-sgn sgn`` with the weight;
    equals :func:`hilbert2d` when the weight is the centered delta.
    """
    if weight.grid != f.grid:
        raise ValueError("weight grid does not match field grid")
    return _wrap_like(f, _apply_mult(np.asarray(f.values, dtype=np.complex128), weight.multiplier))
