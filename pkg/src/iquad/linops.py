"""Matrix-free linear operators: the flat-phase linearization, the derivative
of the nonlinear response at a working phase, its adjoint with the Sobolev
embedding, and interaction-matrix assembly.

All operators are immutable closures over immutable fields; ``apply`` and
``adjoint_apply`` may be called concurrently.  Adjoint consistency is
checkable on demand with Gaussian probe pairs (fixed seed, worst defect).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .grid import Grid, PupilMask, ScalarField
from .sensors import SensorSpec, _require_iquad
from .spectral import ModulationWeight, _check_s, _embedding_mult, hilbert2d_values
from .zernike import ZernikeIndex, zernike_mode

__all__ = [
    "LinearOperator",
    "ilin",
    "ilin_modulated",
    "frechet",
    "frechet_adjoint",
    "interaction_matrix",
    "operator_norm",
]


@dataclass(frozen=True, eq=False)
class LinearOperator:
    """A map and its adjoint on scalar fields of one grid.

    When ``self_adjoint`` is set the two callables are the same object.
    """

    grid: Grid
    apply: Callable[[ScalarField], ScalarField]
    adjoint_apply: Callable[[ScalarField], ScalarField]
    self_adjoint: bool = False
    name: str = "operator"

    def verify_adjoint(self, n_probes: int = 50, seed: int = 1234) -> float:
        """Worst relative defect |<Ax, y> - <x, A*y>| / (|x| |y|) over probes."""
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(n_probes):
            x = ScalarField(self.grid, rng.standard_normal((self.grid.n, self.grid.n)))
            y = ScalarField(self.grid, rng.standard_normal((self.grid.n, self.grid.n)))
            lhs = self.apply(x).inner(y)
            rhs = x.inner(self.adjoint_apply(y))
            worst = max(worst, abs(lhs - rhs) / (x.norm2() * y.norm2()))
        return worst


def _h(grid: Grid, values: np.ndarray, weight: Optional[ModulationWeight]) -> np.ndarray:
    if weight is None:
        return hilbert2d_values(grid, values)
    return np.fft.ifft2(weight.multiplier * np.fft.fft2(values)).real


def _make_ilin(spec: SensorSpec, weight: Optional[ModulationWeight], name: str) -> LinearOperator:
    grid = spec.grid
    chi = spec.pupil.indicator
    h_chi = _h(grid, chi, weight)  # fixed per spec

    def apply(f: ScalarField) -> ScalarField:
        v = f.values
        return ScalarField(grid, chi * (_h(grid, chi * v, weight) - v * h_chi))

    return LinearOperator(grid=grid, apply=apply, adjoint_apply=apply, self_adjoint=True, name=name)


def ilin(spec: SensorSpec) -> LinearOperator:
    """Linearization at the flat phase: ``chi (H(chi f) - f H(chi))``.

    Self-adjoint on the lattice because the Hilbert multiplier is real and
    even; support is exactly the pupil.
    """
    _require_iquad(spec, "ilin")
    return _make_ilin(spec, None, "ilin")


def ilin_modulated(spec: SensorSpec) -> LinearOperator:
    """Modulated linearization: same form with the reweighted transform.

    Self-adjoint for valid (axis-symmetric) weights, whose multiplier is
    real and even.
    """
    _require_iquad(spec, "ilin_modulated")
    if spec.modulation is None:
        raise ValueError("spec has no modulation weight")
    return _make_ilin(spec, spec.modulation, "ilin_modulated")


def frechet(phase: ScalarField, spec: SensorSpec) -> LinearOperator:
    """Derivative of the response at ``phase``, with its lattice-exact adjoint.

    Forward action on a direction ``psi``::

        d1 = chi [cos(phi) H(chi psi cos phi) + sin(phi) H(chi psi sin phi)
                  - psi (cos(phi) H(chi cos phi) + sin(phi) H(chi sin phi))]
        d2 = -chi_D [H(chi psi sin phi) H(chi cos phi)
                     - H(chi psi cos phi) H(chi sin phi)]

    ``d1`` is self-adjoint; the adjoint of ``d2`` nests one transform over
    the detector inside another over the pupil (see the data-side term in
    ``adjoint_apply``).  At the flat phase the derivative reduces to
    :func:`ilin` and the operator is flagged self-adjoint.
    """
    _require_iquad(spec, "frechet")
    if phase.grid != spec.grid:
        raise ValueError("phase grid does not match spec grid")
    grid = spec.grid
    chi = spec.pupil.indicator
    chi_d = spec.detector.indicator
    weight = spec.modulation
    c, s = np.cos(phase.values), np.sin(phase.values)
    h_cc = _h(grid, chi * c, weight)
    h_ss = _h(grid, chi * s, weight)
    diag = c * h_cc + s * h_ss
    flat = bool(np.all(phase.values == 0.0))

    def apply(psi: ScalarField) -> ScalarField:
        v = psi.values
        d1 = chi * (c * _h(grid, chi * v * c, weight) + s * _h(grid, chi * v * s, weight) - v * diag)
        d2 = -chi_d * (_h(grid, chi * v * s, weight) * h_cc - _h(grid, chi * v * c, weight) * h_ss)
        return ScalarField(grid, d1 + d2)

    def adjoint_apply(g: ScalarField) -> ScalarField:
        v = g.values
        a1 = chi * (c * _h(grid, chi * v * c, weight) + s * _h(grid, chi * v * s, weight) - v * diag)
        a2 = -chi * (s * _h(grid, chi_d * v * h_cc, weight) - c * _h(grid, chi_d * v * h_ss, weight))
        return ScalarField(grid, a1 + a2)

    return LinearOperator(
        grid=grid,
        apply=apply,
        adjoint_apply=apply if flat else adjoint_apply,
        self_adjoint=flat,
        name="frechet",
    )


def frechet_difference_signal(phase: ScalarField, spec: SensorSpec) -> LinearOperator:
    """Derivative of the two-path difference signal at ``phase``.

    The difference signal equals the pupil-supported response component, so
    its derivative is the cos-weighted difference form alone, which is
    self-adjoint on the lattice at every working phase (not only at zero).
    """
    _require_iquad(spec, "frechet_difference_signal")
    if phase.grid != spec.grid:
        raise ValueError("phase grid does not match spec grid")
    grid = spec.grid
    chi = spec.pupil.indicator
    weight = spec.modulation
    c, s = np.cos(phase.values), np.sin(phase.values)
    diag = c * _h(grid, chi * c, weight) + s * _h(grid, chi * s, weight)

    def apply(psi: ScalarField) -> ScalarField:
        v = psi.values
        d1 = chi * (c * _h(grid, chi * v * c, weight) + s * _h(grid, chi * v * s, weight) - v * diag)
        return ScalarField(grid, d1)

    return LinearOperator(grid=grid, apply=apply, adjoint_apply=apply,
                          self_adjoint=True, name="frechet_difference_signal")


def frechet_adjoint(phase: ScalarField, spec: SensorSpec, s: float = 11.0 / 6.0) -> LinearOperator:
    """Adjoint of the derivative into the smoothness space: embedding times
    the L2 adjoint.

    ``apply`` maps detector-side data to a phase-space gradient,
    ``E_s* (i1'(phi) + T2*) data``; ``adjoint_apply`` is its own L2 adjoint
    (the forward derivative composed with the self-adjoint embedding
    multiplier).  Valid for smoothness index 1 < s < 2.
    """
    _check_s(s)
    deriv = frechet(phase, spec)
    grid = spec.grid
    mult = _embedding_mult(grid, float(s))

    def embed(f: ScalarField) -> ScalarField:
        return ScalarField(grid, np.fft.ifft2(mult * np.fft.fft2(f.values)).real)

    def apply(g: ScalarField) -> ScalarField:
        return embed(deriv.adjoint_apply(g))

    def adjoint_apply(f: ScalarField) -> ScalarField:
        return deriv.apply(embed(f))

    return LinearOperator(grid=grid, apply=apply, adjoint_apply=adjoint_apply,
                          self_adjoint=False, name="frechet_adjoint")


def interaction_matrix(
    op: LinearOperator,
    basis: list[ZernikeIndex],
    pupil: PupilMask,
    rms: float = 1.0,
) -> np.ndarray:
    """Columns of the per-unit-rms operator response over pupil pixels.

    Column ``j`` is ``op.apply(Z_j at the probe rms) / rms`` sampled at the
    pupil pixels in row-major order, so the probe-amplitude convention does
    not change the matrix (the operator is linear) and modal coefficients
    come out in radians of mode rms.  Ordering is deterministic.
    """
    if not basis:
        raise ValueError("basis must not be empty")
    if rms <= 0:
        raise ValueError("probe rms must be positive")
    ii, jj = np.nonzero(pupil.indicator)
    cols = []
    for idx in basis:
        mode = zernike_mode(op.grid, pupil, idx, rms=rms)
        cols.append(op.apply(mode).values[ii, jj] / rms)
    return np.stack(cols, axis=1)


def operator_norm(op: LinearOperator, n_iters: int = 20, seed: int = 7) -> float:
    """Spectral-norm estimate by power iteration on ``A* A`` (fixed seed)."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((op.grid.n, op.grid.n))
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(n_iters):
        w = op.adjoint_apply(op.apply(ScalarField(op.grid, v))).values
        lam = float(np.linalg.norm(w))
        if lam == 0.0:
            return 0.0
        v = w / lam
    return float(np.sqrt(lam))
