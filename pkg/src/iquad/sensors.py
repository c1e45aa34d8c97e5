"""Forward models: quadrant-mask transfer functions, Fourier-filter
intensities, meta-intensities and their factored spectral forms, the two-path
difference signal, modulation, and pyramid-sensor slope maps.

Scale conventions
-----------------
Intensities are plain ``|field|**2`` for the unit-amplitude pupil field
``chi_Omega exp(-i phi)``; meta-intensities and the difference signal are
intensity differences at the same scale, which makes them equal to the
singular-integral operators of the quadrature oracle with no extra factor.
Each :class:`Measurement` records the pupil flux ``sum(chi) * pitch**2`` in
``flux_norm`` so consumers can form the dimensionless flux-normalized signal
as ``values / flux_norm`` when needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .grid import ComplexField, Grid, PupilMask, ScalarField, full_detector
from .spectral import ModulationWeight, hilbert2d_values, _apply_mult, _hilbert_mult, _sign_axis
from .spectral import hilbert1d_along_x, hilbert1d_along_y
from .zernike import ZernikeIndex, zernike_mode

__all__ = [
    "SensorSpec",
    "Measurement",
    "fqpm_otf",
    "fourier_filter_intensity",
    "fqpm_propagate",
    "meta_intensity",
    "i1_apply",
    "i2_apply",
    "path_intensities",
    "double_iquad",
    "modulated_meta_intensity",
    "pwfs_slopes",
    "sensitivity_scan",
    "pwfs_sensitivity_scan",
]


@dataclass(frozen=True, eq=False)
class SensorSpec:
    """Sensor configuration: differential piston, wavelength, masks, modulation.

    ``delta_over_lambda`` is the quadrant phase step in wavelength units,
    restricted to [-1/2, 1/2]; +1/4 is the standard configuration whose
    transfer function takes the values {1, i}.
    """

    pupil: PupilMask
    detector: PupilMask
    delta_over_lambda: float = 0.25
    lam: float = 500e-9
    modulation: Optional[ModulationWeight] = None

    def __post_init__(self):
        if abs(self.delta_over_lambda) > 0.5:
            raise ValueError("delta/lambda must lie in [-1/2, 1/2]")
        if self.lam <= 0:
            raise ValueError("wavelength must be positive")
        if self.pupil.grid != self.detector.grid:
            raise ValueError("pupil and detector must share a grid")
        if not self.detector.dominates(self.pupil):
            raise ValueError("detector must cover the pupil")
        if self.modulation is not None and self.modulation.grid != self.pupil.grid:
            raise ValueError("modulation weight grid mismatch")

    @property
    def grid(self) -> Grid:
        return self.pupil.grid

    @property
    def is_iquad(self) -> bool:
        return abs(abs(self.delta_over_lambda) - 0.25) < 1e-15


def iquad_spec(pupil: PupilMask, detector: Optional[PupilMask] = None,
               modulation: Optional[ModulationWeight] = None) -> SensorSpec:
    """Standard spec with delta = +lambda/4 and a full-grid detector."""
    det = detector if detector is not None else full_detector(pupil.grid)
    return SensorSpec(pupil=pupil, detector=det, delta_over_lambda=0.25, modulation=modulation)


@dataclass(frozen=True, eq=False)
class Measurement:
    """Sensor output: one or two fields, a kind tag, and the pupil flux."""

    kind: str
    fields: tuple
    flux_norm: float

    def __post_init__(self):
        if self.kind not in ("intensity", "meta-intensity", "double-difference", "slopes"):
            raise ValueError(f"unknown measurement kind {self.kind!r}")
        if self.flux_norm <= 0:
            raise ValueError("flux_norm must be positive")
        if self.kind == "intensity" and np.any(self.fields[0].values < 0):
            raise ValueError("intensity must be nonnegative")

    @property
    def field(self) -> ScalarField:
        return self.fields[0]

    @property
    def values(self) -> np.ndarray:
        return self.fields[0].values

    def normalized(self) -> ScalarField:
        """Flux-normalized (dimensionless) signal."""
        return ScalarField(self.field.grid, self.values / self.flux_norm)


# ---------------------------------------------------------------------------
# transfer function and propagation

def fqpm_otf(grid: Grid, delta_over_lambda: float, axis_mode: str = "average") -> ComplexField:
    """Quadrant-mask transfer function on the centered frequency lattice.

    Quadrants with ``xi * eta < 0`` carry ``exp(2 pi i delta/lambda)``, the
    others 1.  ``axis_mode`` fixes the singular lines the even lattice
    contains (the zero-frequency axes and, by the same sign ambiguity, the
    Nyquist lines):

    * ``"average"`` (default): those lines take ``(1 + exp(2 pi i d/l)) / 2``,
      the mean of the adjacent quadrants.  This is the unique choice that
      matches the sign-multiplier closed form of the propagator exactly.
    * ``"quadrant"``: strict two-branch evaluation (value 1 on the lines),
      keeping the mask unit-modulus everywhere, as on physical hardware.
    """
    if abs(delta_over_lambda) > 0.5:
        raise ValueError("delta/lambda must lie in [-1/2, 1/2]")
    phase = np.exp(2j * np.pi * delta_over_lambda)
    if axis_mode == "average":
        s = np.fft.fftshift(_sign_axis(grid.n, grid.pitch))
        ss = np.outer(s, s)
        vals = (1.0 + phase) / 2.0 + (1.0 - phase) / 2.0 * ss
    elif axis_mode == "quadrant":
        f = grid.freqs
        prod = np.outer(f, f)
        vals = np.where(prod < 0, phase, 1.0 + 0j)
    else:
        raise ValueError(f"unknown axis_mode {axis_mode!r}")
    return ComplexField(grid, vals)


def pupil_field(phase: ScalarField, pupil: PupilMask) -> ComplexField:
    """Unit-amplitude incident field ``chi_Omega exp(-i phi)``."""
    return ComplexField(phase.grid, pupil.indicator * np.exp(-1j * phase.values))


def fourier_filter_intensity(phase: ScalarField, otf: ComplexField, spec: SensorSpec) -> Measurement:
    """Generic focal-plane-filter intensity: ``chi_D |F^-1(OTF F(field))|^2``.

    The unitary transform pair conserves flux, so for unit-modulus transfer
    functions the total intensity equals the pupil flux exactly.
    """
    if otf.grid != phase.grid or spec.grid != phase.grid:
        raise ValueError("phase, OTF and spec must share a grid")
    f = pupil_field(phase, spec.pupil).values
    filtered = np.fft.ifft2(np.fft.ifftshift(otf.values) * np.fft.fft2(f, norm="ortho"), norm="ortho")
    vals = spec.detector.indicator * np.abs(filtered) ** 2
    return Measurement("intensity", (ScalarField(phase.grid, vals),), spec.pupil.flux)


def fqpm_propagate(phase: ScalarField, spec: SensorSpec) -> ComplexField:
    """Closed-form propagated field for an arbitrary differential piston:

        exp(i pi d/l) [cos(pi d/l) f + i sin(pi d/l) H(f)],  f = chi exp(-i phi).

    Identical to filtering with the ``"average"`` transfer function; the
    ``"quadrant"`` mask differs only on the singular frequency lines.
    """
    dol = spec.delta_over_lambda
    f = pupil_field(phase, spec.pupil).values
    hf = _apply_mult(f, _hilbert_mult(phase.grid))
    a = np.exp(1j * np.pi * dol) * (np.cos(np.pi * dol) * f + 1j * np.sin(np.pi * dol) * hf)
    return ComplexField(phase.grid, a)


# ---------------------------------------------------------------------------
# meta-intensity and its factored parts

def _trig_transforms(phase: ScalarField, pupil: PupilMask, weight: Optional[ModulationWeight] = None):
    chi = pupil.indicator
    c = chi * np.cos(phase.values)
    s = chi * np.sin(phase.values)
    if weight is None:
        g = phase.grid
        return np.cos(phase.values), np.sin(phase.values), hilbert2d_values(g, c), \
            hilbert2d_values(g, s), hilbert2d_values(g, chi)
    m = weight.multiplier
    h = lambda v: np.fft.ifft2(m * np.fft.fft2(v)).real
    return np.cos(phase.values), np.sin(phase.values), h(c), h(s), h(chi)


def _require_iquad(spec: SensorSpec, op: str) -> None:
    if not spec.is_iquad:
        raise ValueError(f"{op} requires delta = +/- lambda/4, got delta/lambda = {spec.delta_over_lambda}")


def i1_apply(phase: ScalarField, spec: SensorSpec) -> ScalarField:
    """Pupil-supported (odd) response component:

        chi [cos(phi) H(chi sin phi) - sin(phi) H(chi cos phi)].
    """
    _require_iquad(spec, "i1_apply")
    c, s, hc, hs, _ = _trig_transforms(phase, spec.pupil, spec.modulation)
    return ScalarField(phase.grid, spec.pupil.indicator * (c * hs - s * hc))


def i2_apply(phase: ScalarField, spec: SensorSpec) -> ScalarField:
    """Detector-supported (even) response component:

        chi_D [H(chi cos phi)^2 + H(chi sin phi)^2 - H(chi)^2] / 2.
    """
    _require_iquad(spec, "i2_apply")
    _, _, hc, hs, h1 = _trig_transforms(phase, spec.pupil, spec.modulation)
    return ScalarField(phase.grid, spec.detector.indicator * (hc**2 + hs**2 - h1**2) / 2.0)


def meta_intensity(phase: ScalarField, spec: SensorSpec) -> Measurement:
    """Response relative to the flat-phase operating point, ``I(phi) - I(0)``.

    Computed from the factored spectral forms of the two components, which
    agree with the intensity difference of :func:`fourier_filter_intensity`
    (``"average"`` mask) to rounding.  Requires the unmodulated quarter-wave
    configuration; see :func:`modulated_meta_intensity` otherwise.
    """
    _require_iquad(spec, "meta_intensity")
    if spec.modulation is not None:
        raise ValueError("spec carries a modulation; use modulated_meta_intensity")
    vals = i1_apply(phase, spec).values + i2_apply(phase, spec).values
    return Measurement("meta-intensity", (ScalarField(phase.grid, vals),), spec.pupil.flux)


def modulated_meta_intensity(phase: ScalarField, spec: SensorSpec) -> Measurement:
    """Meta-intensity with the Hilbert kernel reweighted by the modulation.

    Reduces to :func:`meta_intensity` when the weight is the centered delta.
    """
    _require_iquad(spec, "modulated_meta_intensity")
    if spec.modulation is None:
        raise ValueError("spec has no modulation weight")
    vals = i1_apply(phase, spec).values + i2_apply(phase, spec).values
    return Measurement("meta-intensity", (ScalarField(phase.grid, vals),), spec.pupil.flux)


# ---------------------------------------------------------------------------
# two-path difference sensor

def path_intensities(phase: ScalarField, spec: SensorSpec) -> tuple[Measurement, Measurement]:
    """Intensities of the two conjugate quarter-wave paths.

    The beam splitter divides the field amplitude by sqrt(2); each path then
    applies ``exp(+-i pi/4)(f +- i H f)/sqrt(2)``.  Their sum reconstructs
    ``(|H(chi e^{i phi})|^2 + chi^2)/2`` and their difference isolates the
    odd component.
    """
    f = pupil_field(phase, spec.pupil).values / np.sqrt(2.0)
    hf = _apply_mult(f, _hilbert_mult(phase.grid))
    a_plus = np.exp(1j * np.pi / 4) * (f + 1j * hf) / np.sqrt(2.0)
    a_minus = np.exp(-1j * np.pi / 4) * (f - 1j * hf) / np.sqrt(2.0)
    chi_d = spec.detector.indicator
    ip = Measurement("intensity", (ScalarField(phase.grid, chi_d * np.abs(a_plus) ** 2),), spec.pupil.flux)
    im = Measurement("intensity", (ScalarField(phase.grid, chi_d * np.abs(a_minus) ** 2),), spec.pupil.flux)
    return ip, im


def double_iquad(phase: ScalarField, spec: SensorSpec) -> Measurement:
    """Two-path difference signal ``I+ - I-``, masked to the pupil.

    The even components of the two paths cancel, so the difference equals
    the pupil-supported component :func:`i1_apply` pointwise; all signal is
    concentrated inside the pupil, and pixels outside are zeroed.
    """
    ip, im = path_intensities(phase, spec)
    diff = spec.pupil.indicator * (ip.values - im.values)
    return Measurement("double-difference", (ScalarField(phase.grid, diff),), spec.pupil.flux)


# ---------------------------------------------------------------------------
# pyramid-sensor comparison model

def pwfs_slopes(phase: ScalarField, spec: SensorSpec) -> Measurement:
    """Slope maps of the reflective pyramid model, one per axis:

        s_x = -chi/2 [h_x(chi phi) - phi h_x(chi)],
        s_y = +chi/2 [h_y(chi phi) - phi h_y(chi)],

    with ``h`` the per-line 1d Hilbert transform (the 1/(2 pi) kernel factor
    absorbs one pi).  Linear in the phase by construction.
    """
    chi = spec.pupil.indicator
    g = phase.grid
    chi_f = ScalarField(g, chi)
    masked = ScalarField(g, chi * phase.values)
    sx = -0.5 * chi * (hilbert1d_along_x(masked).values - phase.values * hilbert1d_along_x(chi_f).values)
    sy = 0.5 * chi * (hilbert1d_along_y(masked).values - phase.values * hilbert1d_along_y(chi_f).values)
    return Measurement("slopes", (ScalarField(g, sx), ScalarField(g, sy)), spec.pupil.flux)


# ---------------------------------------------------------------------------
# sensitivity analysis

def sensitivity_scan(spec: SensorSpec, mode_set: list[ZernikeIndex], amplitude: float = 1e-3):
    """Small-signal response norm of the difference sensor per Zernike mode.

    Returns ``[(index, ||dI(a Z)||_2 / a), ...]`` sorted by radial then
    azimuthal order.  ``amplitude`` should sit in the linear regime.
    """
    if amplitude <= 0:
        raise ValueError("amplitude must be positive")
    rows = []
    for idx in sorted(mode_set, key=lambda z: (z.n, z.m)):
        mode = zernike_mode(spec.grid, spec.pupil, idx, rms=amplitude)
        resp = double_iquad(mode, spec).field.norm2() / amplitude
        rows.append((idx, resp))
    return rows


def pwfs_sensitivity_scan(spec: SensorSpec, mode_set: list[ZernikeIndex], amplitude: float = 1e-3):
    """Same scan for the pyramid slope model, norm over both slope maps."""
    if amplitude <= 0:
        raise ValueError("amplitude must be positive")
    rows = []
    for idx in sorted(mode_set, key=lambda z: (z.n, z.m)):
        mode = zernike_mode(spec.grid, spec.pupil, idx, rms=amplitude)
        m = pwfs_slopes(mode, spec)
        resp = np.hypot(m.fields[0].norm2(), m.fields[1].norm2()) / amplitude
        rows.append((idx, resp))
    return rows
