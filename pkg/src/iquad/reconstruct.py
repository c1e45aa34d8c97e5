"""Model-based wavefront reconstruction.

Four solvers: gradient descent with a fixed step on the self-adjoint
linearized problem (Landweber), conjugate gradients on the normal equations,
the nonlinear variant that relinearizes at each iterate and steps along the
embedded adjoint gradient, and regularized modal least squares through an
interaction matrix.

Solvers are deterministic state machines over immutable operators: identical
inputs give bit-identical reports.  Residual histories are recorded per
iteration; stagnation and divergence are flagged rather than silently
reported as convergence, so poorly-sensed phase content cannot masquerade as
a successful fit.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .grid import PupilMask, ScalarField
from .linops import (
    LinearOperator,
    frechet,
    frechet_adjoint,
    frechet_difference_signal,
    operator_norm,
)
from .sensors import Measurement, SensorSpec, double_iquad, meta_intensity
from .spectral import _check_s, sobolev_adjoint
from .zernike import ZernikeIndex, zernike_mode

__all__ = [
    "ReconstructionConfig",
    "ReconstructionReport",
    "landweber_linear",
    "cg_normal",
    "landweber_nonlinear",
    "modal_solve",
]

_STAGNATION_WINDOW = 10
_STAGNATION_RTOL = 1e-3
_DIVERGENCE_FACTOR = 10.0


@dataclass(frozen=True)
class ReconstructionConfig:
    """Solver settings.

    ``tau = None`` selects the default step ``1 / ||A||^2`` from a 20-step
    power-iteration estimate; an explicit ``tau`` must stay below twice that
    default.  ``s`` is the smoothness index of the embedded adjoint used by
    the nonlinear solver.
    """

    method: str = "landweber-linear"
    tau: Optional[float] = None
    max_iters: int = 500
    residual_tol: float = 1e-10
    s: float = 11.0 / 6.0
    forward: str = "double"  # nonlinear data model: 'double' or 'meta'

    def __post_init__(self):
        if self.method not in ("landweber-linear", "landweber-nonlinear", "cg", "modal"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.tau is not None and self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.method == "landweber-nonlinear":
            _check_s(self.s)
        if self.forward not in ("double", "meta"):
            raise ValueError(f"unknown forward model {self.forward!r}")


@dataclass
class ReconstructionReport:
    """Iteration trace and final estimate of one solver run."""

    method: str
    iterations: int
    residuals: list[float] = field(repr=False)
    estimate: ScalarField = field(repr=False)
    converged: bool = False
    stagnated: bool = False
    diverged: bool = False
    rel_error: Optional[float] = None
    coefficients: Optional[np.ndarray] = None
    wall_time: float = 0.0
    notes: str = ""

    def __post_init__(self):
        if not all(np.isfinite(r) for r in self.residuals):
            raise ValueError("residual history contains non-finite values")


def _as_field(data) -> ScalarField:
    return data.field if isinstance(data, Measurement) else data


def _embed(f: ScalarField, s: float) -> ScalarField:
    return sobolev_adjoint(f, s)


def _rel_error(estimate: ScalarField, truth: Optional[ScalarField], pupil: Optional[PupilMask]) -> Optional[float]:
    if truth is None:
        return None
    mask = pupil.indicator if pupil is not None else 1.0
    num = np.linalg.norm((estimate.values - truth.values) * mask)
    den = np.linalg.norm(truth.values * mask)
    return float(num / den) if den > 0 else float(num)


def _stagnated(res: list[float], converged: bool) -> bool:
    if converged or len(res) <= _STAGNATION_WINDOW:
        return False
    prev = res[-1 - _STAGNATION_WINDOW]
    return res[-1] >= (1.0 - _STAGNATION_RTOL) * prev


def landweber_linear(
    data,
    op: LinearOperator,
    cfg: ReconstructionConfig,
    truth: Optional[ScalarField] = None,
    pupil: Optional[PupilMask] = None,
) -> ReconstructionReport:
    """Fixed-step iteration ``phi <- phi + tau A*(data - A phi)``.

    Requires ``tau < 2 / ||A||^2`` (power-iteration estimate); the residual
    norm sequence is then non-increasing.  Stops at ``residual_tol`` relative
    to the data norm or at ``max_iters``.
    """
    t0 = time.perf_counter()
    d = _as_field(data)
    norm_est = operator_norm(op)
    bound = 2.0 / norm_est**2 if norm_est > 0 else np.inf
    tau = cfg.tau if cfg.tau is not None else 1.0 / norm_est**2 if norm_est > 0 else 1.0
    if tau >= bound:
        raise ValueError(f"step tau = {tau} exceeds the stability bound 2/||A||^2 = {bound}")
    phi = ScalarField(d.grid, np.zeros_like(d.values))
    data_norm = d.norm2()
    residuals: list[float] = []
    converged = False
    for _ in range(cfg.max_iters):
        r = d - op.apply(phi)
        rn = r.norm2()
        if not np.isfinite(rn):
            raise ValueError("non-finite residual in Landweber iteration")
        residuals.append(rn)
        if rn <= cfg.residual_tol * max(data_norm, 1e-300):
            converged = True
            break
        phi = phi + tau * op.adjoint_apply(r)
    return ReconstructionReport(
        method="landweber-linear",
        iterations=len(residuals),
        residuals=residuals,
        estimate=phi,
        converged=converged,
        stagnated=_stagnated(residuals, converged),
        rel_error=_rel_error(phi, truth, pupil),
        wall_time=time.perf_counter() - t0,
    )


def cg_normal(
    data,
    op: LinearOperator,
    cfg: ReconstructionConfig,
    truth: Optional[ScalarField] = None,
    pupil: Optional[PupilMask] = None,
) -> ReconstructionReport:
    """Conjugate gradients on the normal equations ``A*A x = A* data``.

    For the self-adjoint linearization this is CG on ``A^2`` with right-hand
    side ``A data``; the recorded data-residual norm is non-increasing.  A
    vanishing curvature flags breakdown and returns the current iterate.
    """
    t0 = time.perf_counter()
    d = _as_field(data)
    b = op.adjoint_apply(d)
    x = ScalarField(d.grid, np.zeros_like(d.values))
    r = b
    p = r
    rs = r.inner(r)
    data_norm = d.norm2()
    residuals: list[float] = [(d - op.apply(x)).norm2()]
    converged = residuals[-1] <= cfg.residual_tol * max(data_norm, 1e-300)
    broke_down = stalled = False
    best_x, best_res = x, residuals[-1]
    for _ in range(cfg.max_iters):
        if converged:
            break
        bp = op.adjoint_apply(op.apply(p))
        curv = p.inner(bp)
        if curv <= 1e-300 * max(p.inner(p), 1.0):
            broke_down = True
            break
        alpha = rs / curv
        x = x + alpha * p
        r = r - alpha * bp
        rs_new = r.inner(r)
        residuals.append((d - op.apply(x)).norm2())
        if residuals[-1] < best_res:
            best_x, best_res = x, residuals[-1]
        if residuals[-1] <= cfg.residual_tol * max(data_norm, 1e-300):
            converged = True
            break
        # once the data residual stops improving the semi-definite normal
        # equations only amplify null-space content; stop at the best iterate
        if _stagnated(residuals, False) or residuals[-1] > _DIVERGENCE_FACTOR * best_res:
            stalled = True
            break
        p = r + (rs_new / rs) * p
        rs = rs_new
    if not converged:
        x = best_x
    return ReconstructionReport(
        method="cg",
        iterations=len(residuals) - 1,
        residuals=residuals,
        estimate=x,
        converged=converged,
        stagnated=stalled or broke_down or _stagnated(residuals, converged),
        rel_error=_rel_error(x, truth, pupil),
        wall_time=time.perf_counter() - t0,
        notes="curvature breakdown" if broke_down else "",
    )


def landweber_nonlinear(
    data,
    spec: SensorSpec,
    cfg: ReconstructionConfig,
    truth: Optional[ScalarField] = None,
) -> ReconstructionReport:
    """Nonlinear iteration relinearizing the sensor at each iterate:

        phi <- phi + tau i'(phi)^* (data - F(phi)),

    with ``F`` the two-path difference signal (or the single-path
    meta-intensity when ``cfg.forward == 'meta'``) and the adjoint taken
    through the Sobolev embedding at index ``cfg.s``.  Aborts with the
    ``diverged`` flag when the residual grows tenfold above its running
    minimum.
    """
    t0 = time.perf_counter()
    d = _as_field(data)
    grid = spec.grid
    forward = double_iquad if cfg.forward == "double" else meta_intensity

    # step bound from the flat-phase linearization seen through the embedding
    zero = ScalarField(grid, np.zeros((grid.n, grid.n)))
    fad0 = frechet_adjoint(zero, spec, cfg.s)
    fr0 = frechet(zero, spec)
    comp = LinearOperator(
        grid=grid,
        apply=lambda f: fad0.apply(fr0.apply(f)),
        adjoint_apply=lambda f: fad0.apply(fr0.apply(f)),
        self_adjoint=True,
        name="embedded normal operator",
    )
    # comp is similar to an SPD operator; operator_norm estimates its top eigenvalue
    lam = operator_norm(comp)
    tau = cfg.tau if cfg.tau is not None else (1.0 / lam if lam > 0 else 1.0)
    if lam > 0 and tau >= 2.0 / lam:
        raise ValueError(f"step tau = {tau} exceeds the stability bound {2.0 / lam}")

    phi = zero
    data_norm = d.norm2()
    # the two-path forward leaves O(eps) roundoff even at the operating
    # point, so convergence carries an absolute floor at the flux scale
    floor = max(cfg.residual_tol * data_norm, 1e-13 * spec.pupil.flux)
    residuals: list[float] = []
    converged = diverged = False
    for _ in range(cfg.max_iters):
        r = d - forward(phi, spec).field
        rn = r.norm2()
        if not np.isfinite(rn):
            raise ValueError("non-finite residual in nonlinear iteration")
        residuals.append(rn)
        if rn <= floor:
            converged = True
            break
        if rn > _DIVERGENCE_FACTOR * min(residuals):
            diverged = True
            break
        if cfg.forward == "double":
            # the difference-signal derivative is self-adjoint; embed it
            grad = _embed(frechet_difference_signal(phi, spec).apply(r), cfg.s)
        else:
            grad = frechet_adjoint(phi, spec, cfg.s).apply(r)
        phi = phi + tau * grad
    return ReconstructionReport(
        method="landweber-nonlinear",
        iterations=len(residuals),
        residuals=residuals,
        estimate=phi,
        converged=converged,
        stagnated=_stagnated(residuals, converged),
        diverged=diverged,
        rel_error=_rel_error(phi, truth, spec.pupil),
        wall_time=time.perf_counter() - t0,
    )


def modal_solve(
    data,
    matrix: np.ndarray,
    basis: list[ZernikeIndex],
    pupil: PupilMask,
    alpha: Optional[float] = None,
    truth: Optional[ScalarField] = None,
) -> ReconstructionReport:
    """Tikhonov-regularized modal least squares through an interaction matrix.

    Solves ``(M^T M + alpha I) c = M^T d`` over the pupil pixels and
    synthesizes the phase from the modal coefficients.  ``alpha = None``
    uses the default ``1e-6 trace(M^T M) / n_modes``; an explicit zero is
    accepted only for well-conditioned normal matrices.
    """
    t0 = time.perf_counter()
    d = _as_field(data)
    ii, jj = np.nonzero(pupil.indicator)
    rhs_vec = d.values[ii, jj]
    if matrix.shape != (len(ii), len(basis)):
        raise ValueError(f"matrix shape {matrix.shape} does not match pupil/basis")
    normal = matrix.T @ matrix
    if alpha is None:
        alpha = 1e-6 * np.trace(normal) / len(basis)
    if alpha < 0:
        raise ValueError("regularization must be nonnegative")
    if alpha == 0.0 and (not np.all(np.isfinite(normal)) or np.linalg.cond(normal) > 1e12):
        raise ValueError("singular normal matrix with alpha = 0; use alpha > 0")
    coeffs = np.linalg.solve(normal + alpha * np.eye(len(basis)), matrix.T @ rhs_vec)
    grid = pupil.grid
    synth = np.zeros((grid.n, grid.n))
    for c, idx in zip(coeffs, basis):
        synth += c * zernike_mode(grid, pupil, idx, rms=1.0).values
    estimate = ScalarField(grid, synth)
    resid = float(np.linalg.norm(rhs_vec - matrix @ coeffs) * grid.pitch)
    return ReconstructionReport(
        method="modal",
        iterations=1,
        residuals=[resid],
        estimate=estimate,
        converged=True,
        rel_error=_rel_error(estimate, truth, pupil),
        coefficients=coeffs,
        wall_time=time.perf_counter() - t0,
    )
