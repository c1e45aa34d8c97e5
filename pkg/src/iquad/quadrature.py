"""Definition-level principal-value quadrature oracles.

Every operator here discretizes its defining singular integral directly on
the lattice: midpoint weights of ``pitch**2`` per primed sample, with the
singular lines ``x' = x`` and ``y' = y`` excluded (default) or the primed
lattice staggered by half a pitch in both axes.  The exclusion set is
symmetric about the singularity, matching the principal-value limit; the
stagger scheme exists to cross-check scheme-induced bias.

These oracles are slow by design (O(n^4) double sums, O(n^6) raw quadruple
sums) and hard-guarded to small grids so they stay usable in CI.  They are
the independent reference against which the spectral factored forms in
:mod:`iquad.sensors` and :mod:`iquad.linops` are validated; the quadruple
sums additionally get a raw-loop "oracle of the oracle" at n <= 12.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .grid import PupilMask, ScalarField
from .spectral import _check_s, _embedding_mult

__all__ = [
    "QuadratureScheme",
    "EXCLUSION",
    "OFFSET",
    "pv_hilbert2d",
    "pv_i1",
    "pv_i2",
    "pv_i2_rawloop",
    "pv_ilin",
    "pv_frechet",
    "pv_frechet_i2p_rawloop",
    "pv_adjoint",
    "pv_adjoint_l2",
    "pv_pwfs_slopes",
]

def _carray(a: np.ndarray) -> np.ndarray:
    """Writable C-contiguous copy for the kernel buffers."""
    return np.array(a, dtype=np.float64, order="C")


_MAX_N_DOUBLE = 64   # O(n^4) tier
_MAX_N_QUAD = 24     # factored quadruple tier
_MAX_N_RAW = 12      # raw sextuple tier


@dataclass(frozen=True)
class QuadratureScheme:
    """Singularity handling: exactly one of stagger / exclusion is active."""

    stagger: bool = False

    @property
    def exclusion(self) -> bool:
        return not self.stagger


EXCLUSION = QuadratureScheme(stagger=False)
OFFSET = QuadratureScheme(stagger=True)


def _guard(n: int, limit: int, what: str) -> None:
    if n > limit:
        raise ValueError(f"{what} oracle is limited to n <= {limit}, got n = {n}")


def pv_hilbert2d(f: ScalarField, scheme: QuadratureScheme = EXCLUSION) -> ScalarField:
    """Quadrature of ``(1/pi^2) p.v. int f(x',y') / ((x'-x)(y'-y)) dx'dy'``."""
    _guard(f.grid.n, _MAX_N_DOUBLE, "pv_hilbert2d")
    out = _kernels.pv_sum2d(_carray(f.values), f.grid.pitch, scheme.stagger)
    return ScalarField(f.grid, out / np.pi**2)


def pv_i1(phase: ScalarField, pupil: PupilMask, scheme: QuadratureScheme = EXCLUSION) -> ScalarField:
    """Direct double sum of the sin-difference kernel over the pupil."""
    _guard(phase.grid.n, _MAX_N_DOUBLE, "pv_i1")
    out = _kernels.pv_i1_direct(
        _carray(phase.values),
        _carray(pupil.indicator),
        phase.grid.pitch,
        scheme.stagger,
    )
    return ScalarField(phase.grid, out)


def pv_ilin(phase: ScalarField, pupil: PupilMask, scheme: QuadratureScheme = EXCLUSION) -> ScalarField:
    """Direct double sum of the linear-difference kernel; exactly linear."""
    _guard(phase.grid.n, _MAX_N_DOUBLE, "pv_ilin")
    out = _kernels.pv_ilin_direct(
        _carray(phase.values),
        _carray(pupil.indicator),
        phase.grid.pitch,
        scheme.stagger,
    )
    return ScalarField(phase.grid, out)


def _pv_sum(values: np.ndarray, pitch: float, scheme: QuadratureScheme) -> np.ndarray:
    return _kernels.pv_sum2d(_carray(values), pitch, scheme.stagger) / np.pi**2


def pv_i2(
    phase: ScalarField,
    pupil: PupilMask,
    detector: PupilMask,
    scheme: QuadratureScheme = EXCLUSION,
) -> ScalarField:
    """Quadruple-kernel sum via the separable factorization.

    ``cos(a-b) = cos a cos b + sin a sin b`` splits the quadruple sum into
    products of double sums, an identity that holds exactly on the lattice;
    the result equals ``(S(cos)^2 + S(sin)^2 - S(1)^2)/2`` on the detector
    with ``S`` the masked pv double sum.  The raw sextuple loop is available
    as :func:`pv_i2_rawloop` for n <= 12.
    """
    _guard(phase.grid.n, _MAX_N_QUAD, "pv_i2")
    chi = pupil.indicator
    p = phase.grid.pitch
    sc = _pv_sum(chi * np.cos(phase.values), p, scheme)
    ss = _pv_sum(chi * np.sin(phase.values), p, scheme)
    s1 = _pv_sum(chi, p, scheme)
    out = detector.indicator * (sc**2 + ss**2 - s1**2) / 2.0
    return ScalarField(phase.grid, out)


def pv_i2_rawloop(
    phase: ScalarField,
    pupil: PupilMask,
    detector: PupilMask,
    scheme: QuadratureScheme = EXCLUSION,
) -> ScalarField:
    """Raw sextuple loop for :func:`pv_i2`; n <= 12 only."""
    _guard(phase.grid.n, _MAX_N_RAW, "pv_i2 raw loop")
    out = _kernels.pv_i2_raw(
        _carray(phase.values),
        _carray(pupil.indicator),
        _carray(detector.indicator),
        phase.grid.pitch,
        scheme.stagger,
    )
    return ScalarField(phase.grid, out)


def pv_frechet(
    phase: ScalarField,
    direction: ScalarField,
    pupil: PupilMask,
    detector: PupilMask,
    scheme: QuadratureScheme = EXCLUSION,
) -> ScalarField:
    """Derivative of the full response at ``phase`` applied to ``direction``.

    The pupil-supported part is the direct cos-weighted difference sum; the
    detector-supported part uses the exact lattice factorization
    ``-chi_D [S(chi psi sin phi) S(chi cos phi) - S(chi psi cos phi) S(chi sin phi)]``
    (expansion of the sin-difference kernel into separable products).
    """
    _guard(phase.grid.n, _MAX_N_QUAD, "pv_frechet")
    chi = pupil.indicator
    p = phase.grid.pitch
    i1p = _kernels.pv_i1p_direct(
        _carray(phase.values),
        _carray(direction.values),
        _carray(chi),
        p,
        scheme.stagger,
    )
    c, s = np.cos(phase.values), np.sin(phase.values)
    psi = direction.values
    i2p = -detector.indicator * (
        _pv_sum(chi * psi * s, p, scheme) * _pv_sum(chi * c, p, scheme)
        - _pv_sum(chi * psi * c, p, scheme) * _pv_sum(chi * s, p, scheme)
    )
    return ScalarField(phase.grid, i1p + i2p)


def pv_frechet_i2p_rawloop(
    phase: ScalarField,
    direction: ScalarField,
    pupil: PupilMask,
    detector: PupilMask,
    scheme: QuadratureScheme = EXCLUSION,
) -> ScalarField:
    """Raw sextuple loop for the detector-supported derivative part; n <= 12."""
    _guard(phase.grid.n, _MAX_N_RAW, "pv_frechet raw loop")
    out = _kernels.pv_i2p_raw(
        _carray(phase.values),
        _carray(direction.values),
        _carray(pupil.indicator),
        _carray(detector.indicator),
        phase.grid.pitch,
        scheme.stagger,
    )
    return ScalarField(phase.grid, out)


def pv_adjoint_l2(
    phase: ScalarField,
    data: ScalarField,
    pupil: PupilMask,
    detector: PupilMask,
    scheme: QuadratureScheme = EXCLUSION,
) -> ScalarField:
    """L2 adjoint of the derivative, before the Sobolev embedding.

    The pupil part reuses the cos-weighted difference sum (that operator is
    its own transpose on the lattice).  The detector part factors into
    nested pv sums,

        -chi_Omega [ sin(phi) S_D(data S_Omega(cos phi))
                   - cos(phi) S_D(data S_Omega(sin phi)) ],

    where the inner sum runs over the pupil and is evaluated at the primed
    (detector) point, and the outer sum runs over the detector; the factor
    two from the merged transposed halves of the quadruple kernel is folded
    into the 1/pi^4 scaling.  The exclusion sets transpose onto themselves,
    so the inner-product identity against :func:`pv_frechet` holds to
    rounding.
    """
    _guard(phase.grid.n, _MAX_N_QUAD, "pv_adjoint")
    chi = pupil.indicator
    p = phase.grid.pitch
    c, s = np.cos(phase.values), np.sin(phase.values)
    i1p_star = _kernels.pv_i1p_direct(
        _carray(phase.values),
        _carray(data.values),
        _carray(chi),
        p,
        scheme.stagger,
    )
    inner_c = _pv_sum(chi * c, p, scheme)
    inner_s = _pv_sum(chi * s, p, scheme)
    dv = detector.indicator * data.values
    g_c = _pv_sum(dv * inner_c, p, scheme)
    g_s = _pv_sum(dv * inner_s, p, scheme)
    t2_star = -chi * (s * g_c - c * g_s)
    return ScalarField(phase.grid, i1p_star + t2_star)


def pv_adjoint(
    phase: ScalarField,
    data: ScalarField,
    pupil: PupilMask,
    detector: PupilMask,
    s: float = 11.0 / 6.0,
    scheme: QuadratureScheme = EXCLUSION,
) -> ScalarField:
    """Full adjoint: the L2 adjoint composed with the embedding multiplier."""
    _check_s(s)
    l2 = pv_adjoint_l2(phase, data, pupil, detector, scheme)
    out = np.fft.ifft2(_embedding_mult(phase.grid, float(s)) * np.fft.fft2(l2.values)).real
    return ScalarField(phase.grid, out)


def pv_pwfs_slopes(phase: ScalarField, pupil: PupilMask) -> tuple[ScalarField, ScalarField]:
    """Per-chord pv sums for the two slope maps (exclusion handling).

    s_x at (x, y) sums ``(phi(x',y) - phi(x,y)) / (x'-x)`` over the pupil
    chord at height y, scaled by ``-1/(2 pi)``; s_y analogously along y.
    """
    n = phase.grid.n
    _guard(n, _MAX_N_DOUBLE, "pv_pwfs_slopes")
    x = phase.grid.coords
    d = x[None, :] - x[:, None]
    with np.errstate(divide="ignore"):
        k = np.where(d != 0.0, phase.grid.pitch / np.where(d == 0.0, 1.0, d), 0.0)
    chi = pupil.indicator
    phi = phase.values
    # along x: for each column y, K acts on the x-index (axis 0)
    sx = -chi * (k @ (chi * phi) - phi * (k @ chi)) / (2.0 * np.pi)
    # along y: act on axis 1
    sy = chi * ((chi * phi) @ k.T - phi * (chi @ k.T)) / (2.0 * np.pi)
    return ScalarField(phase.grid, sx), ScalarField(phase.grid, sy)
