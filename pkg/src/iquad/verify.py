"""Invariant suite behind ``iquad verify``: every identity and property the
operator calculus is supposed to satisfy, evaluated at configurable sizes
with one pass/fail row per check.

The suite supports deliberate fault injection (``fault="hilbert-sign"``)
which evaluates the factored response with a sign-flipped Hilbert multiplier;
the difference-signal identity check must then fail, demonstrating that the
suite actually constrains the kernels.

Thresholds marked "frozen" were measured on this implementation and guard
against regressions; the spectral-vs-quadrature agreement floor is set by
the pad-2 periodization and the plain-midpoint rule (see the acceptance
suite for the discussion).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .grid import ScalarField, circular_pupil, full_detector, make_grid
from .linops import frechet, ilin, ilin_modulated
from .quadrature import (
    EXCLUSION,
    pv_adjoint_l2,
    pv_frechet,
    pv_frechet_i2p_rawloop,
    pv_hilbert2d,
    pv_i1,
    pv_i2,
    pv_i2_rawloop,
    pv_ilin,
)
from .sensors import (
    double_iquad,
    fourier_filter_intensity,
    fqpm_otf,
    i1_apply,
    iquad_spec,
    meta_intensity,
    path_intensities,
)
from .spectral import (
    delta_weight,
    fft2,
    hilbert2d,
    hilbert2d_values,
    ifft2,
    off_axis_projector,
    sobolev_adjoint,
    tent_weight,
)
from .grid import ComplexField

__all__ = ["VerifyConfig", "CheckResult", "run_checks"]


@dataclass(frozen=True)
class VerifyConfig:
    n_spectral: int = 64
    n_oracle: int = 16
    n_raw: int = 12
    seed: int = 0
    fault: Optional[str] = None  # None or "hilbert-sign"


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""

    def row(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<42s} measured={self.measured:.3e} tol={self.tolerance:.3e} {self.detail}"


def _sensor_setup(n: int, seed: int, amplitude: float = 0.3):
    grid = make_grid(n, 1e-3 * 64 / n, 2)
    pupil = circular_pupil(grid, n // 2)
    spec = iquad_spec(pupil)
    rng = np.random.default_rng(seed)
    x = grid.coords
    ext = grid.extent
    X, Y = np.meshgrid(x, x, indexing="ij")
    smooth = np.sin(2 * np.pi * X / ext) * np.cos(2 * np.pi * 2 * Y / ext) + 0.5 * np.cos(
        2 * np.pi * (X - Y) / ext
    )
    phase = ScalarField(grid, amplitude * smooth)
    rough = ScalarField(grid, amplitude * rng.standard_normal((n, n)))
    return grid, pupil, spec, phase, rough


def _relmax(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(np.abs(a).max(), np.abs(b).max(), 1e-300)
    return float(np.abs(a - b).max() / scale)


def _rel2(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(a), 1e-300))


# ---------------------------------------------------------------------------
# individual checks; each returns a CheckResult

def _check_fft_roundtrip(cfg: VerifyConfig) -> CheckResult:
    grid, _, _, _, rough = _sensor_setup(cfg.n_spectral, cfg.seed)
    rng = np.random.default_rng(cfg.seed + 1)
    f = ComplexField(grid, rng.standard_normal((grid.n, grid.n)) + 1j * rng.standard_normal((grid.n, grid.n)))
    back = ifft2(fft2(f)).values
    err = _relmax(f.values.real, back.real) + _relmax(f.values.imag, back.imag)
    parseval = abs(np.linalg.norm(fft2(f).values) - np.linalg.norm(f.values)) / np.linalg.norm(f.values)
    measured = max(err, parseval)
    return CheckResult("fft unitarity and round-trip", measured <= 1e-13, measured, 1e-13)


def _hilbert_vals(cfg: VerifyConfig, grid, values):
    h = hilbert2d_values(grid, values)
    if cfg.fault == "hilbert-sign":
        h = -h
    return h


def _check_hilbert_involution(cfg: VerifyConfig) -> CheckResult:
    grid, _, _, _, rough = _sensor_setup(cfg.n_spectral, cfg.seed)
    f = rough
    hh = hilbert2d(hilbert2d(f)).values
    p = off_axis_projector(f).values
    measured = float(np.abs(hh - p).max() / max(np.abs(f.values).max(), 1e-300))
    return CheckResult("H o H equals off-axis projector", measured <= 1e-12, measured, 1e-12)


def _check_hilbert_energy(cfg: VerifyConfig) -> CheckResult:
    grid, _, _, _, rough = _sensor_setup(cfg.n_spectral, cfg.seed)
    hf = hilbert2d(rough).norm2()
    pf = off_axis_projector(rough).norm2()
    measured = abs(hf - pf) / max(pf, 1e-300)
    return CheckResult("H energy conservation off-axis", measured <= 1e-12, measured, 1e-12)


def _check_hilbert_symmetry(cfg: VerifyConfig) -> CheckResult:
    grid, _, _, phase, rough = _sensor_setup(cfg.n_spectral, cfg.seed)
    lhs = hilbert2d(phase).inner(rough)
    rhs = phase.inner(hilbert2d(rough))
    measured = abs(lhs - rhs) / (phase.norm2() * rough.norm2())
    return CheckResult("H symmetry <Hf,g>=<f,Hg>", measured <= 1e-12, measured, 1e-12)


def _check_sobolev(cfg: VerifyConfig) -> CheckResult:
    grid, _, _, phase, rough = _sensor_setup(cfg.n_spectral, cfg.seed)
    s = 11.0 / 6.0
    lhs = sobolev_adjoint(phase, s).inner(rough)
    rhs = phase.inner(sobolev_adjoint(rough, s))
    sym = abs(lhs - rhs) / (phase.norm2() * rough.norm2())
    pos = sobolev_adjoint(rough, s).inner(rough)
    measured = sym if pos >= 0 else 1.0
    return CheckResult("embedding adjoint symmetric positive", measured <= 1e-12, measured, 1e-12)


def _check_closed_form_intensity(cfg: VerifyConfig) -> CheckResult:
    grid, pupil, spec, phase, rough = _sensor_setup(cfg.n_spectral, cfg.seed)
    otf = fqpm_otf(grid, 0.25)
    zero = ScalarField(grid, np.zeros((grid.n, grid.n)))
    worst = 0.0
    rng = np.random.default_rng(cfg.seed + 2)
    for _ in range(5):
        phi = ScalarField(grid, 0.5 * rng.standard_normal((grid.n, grid.n)))
        lhs = meta_intensity(phi, spec).values
        if cfg.fault == "hilbert-sign":
            lhs = -lhs
        rhs = fourier_filter_intensity(phi, otf, spec).values - fourier_filter_intensity(zero, otf, spec).values
        worst = max(worst, _relmax(lhs, rhs))
    return CheckResult("meta-intensity equals I(phi)-I(0)", worst <= 1e-12, worst, 1e-12)


def _check_reference_intensity(cfg: VerifyConfig) -> CheckResult:
    grid, pupil, spec, _, _ = _sensor_setup(cfg.n_spectral, cfg.seed)
    otf = fqpm_otf(grid, 0.25)
    zero = ScalarField(grid, np.zeros((grid.n, grid.n)))
    i0 = fourier_filter_intensity(zero, otf, spec).values
    hchi = hilbert2d_values(grid, pupil.indicator)
    ref = spec.detector.indicator * (hchi**2 + pupil.indicator**2) / 2.0
    measured = _relmax(i0, ref)
    return CheckResult("reference intensity closed form", measured <= 1e-12, measured, 1e-12)


def _check_double_iquad_identity(cfg: VerifyConfig) -> CheckResult:
    grid, pupil, spec, phase, _ = _sensor_setup(cfg.n_spectral, cfg.seed)
    dI = double_iquad(phase, spec).values
    chi = pupil.indicator
    c, s = np.cos(phase.values), np.sin(phase.values)
    hs = _hilbert_vals(cfg, grid, chi * s)
    hc = _hilbert_vals(cfg, grid, chi * c)
    i1 = chi * (c * hs - s * hc)
    measured = _relmax(dI, i1)
    return CheckResult("difference signal equals i1", measured <= 1e-12, measured, 1e-12)


def _check_di_antisymmetry(cfg: VerifyConfig) -> CheckResult:
    grid, _, spec, phase, _ = _sensor_setup(cfg.n_spectral, cfg.seed)
    a = double_iquad(phase, spec).values
    b = double_iquad(-1.0 * phase, spec).values
    measured = _relmax(a, -b)
    return CheckResult("difference signal antisymmetry", measured <= 1e-12, measured, 1e-12)


def _check_beam_splitter(cfg: VerifyConfig) -> CheckResult:
    grid, pupil, spec, phase, _ = _sensor_setup(cfg.n_spectral, cfg.seed)
    ip, im = path_intensities(phase, spec)
    g = pupil.indicator * np.exp(1j * phase.values)
    hg = hilbert2d(ComplexField(grid, g)).values
    tot = (np.abs(hg) ** 2 + pupil.indicator**2) / 2.0
    measured = _relmax(ip.values + im.values, tot)
    return CheckResult("two-path intensity bookkeeping", measured <= 1e-12, measured, 1e-12)


def _check_flux(cfg: VerifyConfig) -> CheckResult:
    grid, pupil, spec, phase, _ = _sensor_setup(cfg.n_spectral, cfg.seed)
    worst = 0.0
    for dol in (0.0, 0.25, 0.5, -0.25):
        otf = fqpm_otf(grid, dol, axis_mode="quadrant")
        i = fourier_filter_intensity(phase, otf, spec)
        worst = max(worst, abs(i.values.sum() - pupil.count) / pupil.count)
    rng = np.random.default_rng(cfg.seed + 3)
    vals = np.exp(1j * rng.uniform(0, 2 * np.pi, (grid.n, grid.n)))
    i = fourier_filter_intensity(phase, ComplexField(grid, vals), spec)
    worst = max(worst, abs(i.values.sum() - pupil.count) / pupil.count)
    return CheckResult("flux conservation, unit-modulus masks", worst <= 1e-12, worst, 1e-12)


def _check_self_adjointness(cfg: VerifyConfig) -> CheckResult:
    grid, pupil, spec, _, _ = _sensor_setup(cfg.n_spectral, cfg.seed)
    op = ilin(spec)
    d1 = op.verify_adjoint(n_probes=50, seed=cfg.seed + 4)
    mod_spec = iquad_spec(pupil, modulation=tent_weight(grid, 4.0 / (pupil.diameter_samples * grid.pitch)))
    d2 = ilin_modulated(mod_spec).verify_adjoint(n_probes=50, seed=cfg.seed + 5)
    measured = max(d1, d2)
    return CheckResult("linearization self-adjointness", measured <= 1e-10, measured, 1e-10)


def _check_support(cfg: VerifyConfig) -> CheckResult:
    grid, pupil, spec, phase, rough = _sensor_setup(cfg.n_spectral, cfg.seed)
    out = ilin(spec).apply(rough).values
    measured = float(np.abs(out * (1.0 - pupil.indicator)).max())
    return CheckResult("linear response supported in pupil", measured == 0.0, measured, 0.0)


def _check_parity(cfg: VerifyConfig) -> CheckResult:
    grid, _, spec, phase, _ = _sensor_setup(cfg.n_spectral, cfg.seed)

    def reflect(v):
        idx = (-np.arange(grid.n)) % grid.n
        return v[np.ix_(idx, idx)]

    op = ilin(spec)
    a = op.apply(ScalarField(grid, reflect(phase.values))).values
    b = reflect(op.apply(phase).values)
    measured = _relmax(a, b)
    return CheckResult("point-reflection equivariance", measured <= 1e-12, measured, 1e-12)


def _check_frechet_zero(cfg: VerifyConfig) -> CheckResult:
    grid, _, spec, phase, rough = _sensor_setup(cfg.n_spectral, cfg.seed)
    zero = ScalarField(grid, np.zeros((grid.n, grid.n)))
    a = frechet(zero, spec).apply(rough).values
    b = ilin(spec).apply(rough).values
    measured = _relmax(a, b)
    return CheckResult("derivative at zero equals linearization", measured <= 1e-12, measured, 1e-12)


def _check_frechet_adjoint_probe(cfg: VerifyConfig) -> CheckResult:
    grid, _, spec, phase, _ = _sensor_setup(cfg.n_spectral, cfg.seed)
    measured = frechet(phase, spec).verify_adjoint(n_probes=20, seed=cfg.seed + 6)
    return CheckResult("derivative adjoint probes (L2)", measured <= 1e-9, measured, 1e-9)


def _check_modulation_limit(cfg: VerifyConfig) -> CheckResult:
    grid, pupil, spec, phase, _ = _sensor_setup(cfg.n_spectral, cfg.seed)
    mod_spec = iquad_spec(pupil, modulation=delta_weight(grid))
    a = ilin_modulated(mod_spec).apply(phase).values
    b = ilin(spec).apply(phase).values
    measured = _relmax(a, b)
    return CheckResult("delta modulation recovers unmodulated", measured <= 1e-12, measured, 1e-12)


def _check_oracle_adjoint(cfg: VerifyConfig) -> CheckResult:
    n = cfg.n_oracle
    grid = make_grid(n, 1e-3 * 64 / n, 2)
    pupil = circular_pupil(grid, n // 2)
    det = full_detector(grid)
    rng = np.random.default_rng(cfg.seed + 7)
    phi = ScalarField(grid, 0.5 * rng.standard_normal((n, n)))
    psi = ScalarField(grid, rng.standard_normal((n, n)))
    dat = ScalarField(grid, rng.standard_normal((n, n)))
    lhs = pv_frechet(phi, psi, pupil, det).inner(dat)
    rhs = psi.inner(pv_adjoint_l2(phi, dat, pupil, det))
    measured = abs(lhs - rhs) / (psi.norm2() * dat.norm2())
    return CheckResult("oracle adjoint inner-product identity", measured <= 1e-10, measured, 1e-10)


def _check_raw_loops(cfg: VerifyConfig) -> CheckResult:
    n = cfg.n_raw
    grid = make_grid(n, 1.0, 2)
    pupil = circular_pupil(grid, n // 2)
    det = full_detector(grid)
    rng = np.random.default_rng(cfg.seed + 8)
    phi = ScalarField(grid, rng.standard_normal((n, n)))
    psi = ScalarField(grid, rng.standard_normal((n, n)))
    raw = pv_i2_rawloop(phi, pupil, det).values
    fac = pv_i2(phi, pupil, det).values
    e1 = np.abs(raw - fac).max() / max(np.abs(raw).max(), 1e-300)
    raw2 = pv_frechet_i2p_rawloop(phi, psi, pupil, det).values
    from ._kernels import pv_i1p_direct

    i1p = pv_i1p_direct(
        np.array(phi.values), np.array(psi.values), np.array(pupil.indicator), grid.pitch, False
    )
    fac2 = pv_frechet(phi, psi, pupil, det).values - i1p
    e2 = np.abs(raw2 - fac2).max() / max(np.abs(raw2).max(), 1e-300)
    s_sin = pv_hilbert2d(ScalarField(grid, pupil.indicator * np.sin(phi.values))).values
    s_cos = pv_hilbert2d(ScalarField(grid, pupil.indicator * np.cos(phi.values))).values
    i1_fac = pupil.indicator * (np.cos(phi.values) * s_sin - np.sin(phi.values) * s_cos)
    e3 = np.abs(pv_i1(phi, pupil).values - i1_fac).max() / max(np.abs(i1_fac).max(), 1e-300)
    measured = max(e1, e2, e3)
    return CheckResult("raw-loop factored-form identities", measured <= 1e-10, measured, 1e-10)


def _oracle_agreement_errors(cfg: VerifyConfig):
    """Relative L2 distance between spectral and quadrature i1/ilin/H per n."""
    errs = {}
    for n in (16, 32, 64):
        grid = make_grid(n, 1e-3 * 64 / n, 2)
        pupil = circular_pupil(grid, n // 2)
        spec = iquad_spec(pupil)
        x = grid.coords
        ext = grid.extent
        X, Y = np.meshgrid(x, x, indexing="ij")
        phi = ScalarField(
            grid,
            0.3
            * (np.sin(2 * np.pi * X / ext) * np.cos(2 * np.pi * 2 * Y / ext) + 0.5 * np.cos(2 * np.pi * (X - Y) / ext)),
        )
        masked = ScalarField(grid, pupil.indicator * phi.values)
        e_h = _rel2(hilbert2d(masked).values, pv_hilbert2d(masked).values)
        e_i1 = _rel2(i1_apply(phi, spec).values, pv_i1(phi, pupil).values)
        e_il = _rel2(ilin(spec).apply(phi).values, pv_ilin(phi, pupil).values)
        errs[n] = (e_h, e_i1, e_il)
    return errs


def _check_oracle_agreement(cfg: VerifyConfig) -> CheckResult:
    errs = _oracle_agreement_errors(cfg)
    monotone = all(
        errs[16][k] > errs[32][k] > errs[64][k] for k in range(3)
    )
    # frozen regression thresholds measured on this implementation
    frozen = {16: (0.55, 0.50, 0.50), 32: (0.40, 0.30, 0.30), 64: (0.32, 0.18, 0.18)}
    within = all(errs[n][k] <= frozen[n][k] for n in errs for k in range(3))
    measured = max(errs[32])
    detail = " ".join(f"n={n}:{max(v):.3f}" for n, v in errs.items())
    return CheckResult(
        "oracle agreement monotone (frozen tols)", monotone and within, measured, frozen[32][0], detail
    )


_CHECKS: list[Callable[[VerifyConfig], CheckResult]] = [
    _check_fft_roundtrip,
    _check_hilbert_involution,
    _check_hilbert_energy,
    _check_hilbert_symmetry,
    _check_sobolev,
    _check_closed_form_intensity,
    _check_reference_intensity,
    _check_double_iquad_identity,
    _check_di_antisymmetry,
    _check_beam_splitter,
    _check_flux,
    _check_self_adjointness,
    _check_support,
    _check_parity,
    _check_frechet_zero,
    _check_frechet_adjoint_probe,
    _check_modulation_limit,
    _check_oracle_adjoint,
    _check_raw_loops,
    _check_oracle_agreement,
]


def run_checks(cfg: VerifyConfig) -> list[CheckResult]:
    """Run the whole suite; order is deterministic."""
    return [check(cfg) for check in _CHECKS]
