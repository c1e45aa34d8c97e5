"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line
with the measured defect (run with ``pytest -s`` to see every line).

Criterion 8 is split into its two clauses.  The monotone-improvement clause
holds; the fixed 10%-at-n=32 tolerance clause does not and is implemented
faithfully anyway: with the mandated plain-midpoint quadrature, hard-edged
pupil and pad-2 periodic spectral path, the spectral/oracle distance at
n = 32 measures ~0.24 for the pupil-supported operators (~0.37 for the bare
transform), and the pad-2 wraparound alone contributes ~0.11, so the bound
cannot be met by any refinement of this design.
"""

import numpy as np
import pytest

from iquad.grid import ComplexField, ScalarField, circular_pupil, full_detector, make_grid
from iquad.linops import (
    frechet,
    frechet_adjoint,
    frechet_difference_signal,
    ilin,
    ilin_modulated,
)
from iquad.quadrature import pv_adjoint_l2, pv_frechet, pv_hilbert2d, pv_i1, pv_ilin
from iquad.reconstruct import ReconstructionConfig, cg_normal, landweber_linear
from iquad.sensors import (
    double_iquad,
    fourier_filter_intensity,
    fqpm_otf,
    i1_apply,
    iquad_spec,
    meta_intensity,
    modulated_meta_intensity,
    path_intensities,
)
from iquad.spectral import (
    delta_weight,
    hilbert2d,
    hilbert2d_values,
    off_axis_projector,
    sobolev_adjoint,
    tent_weight,
)
from iquad.zernike import noll_index, zernike_mode

from conftest import rand_field, smooth_phase


def report(num: str, passed: bool, detail: str) -> None:
    print(f"[criterion {num}] {'PASS' if passed else 'FAIL'}: {detail}")


def setup64():
    grid = make_grid(64, 1e-3, 2)
    pupil = circular_pupil(grid, 32)
    return grid, pupil, iquad_spec(pupil)


def test_criterion_01_closed_form_intensity_identity():
    grid, pupil, spec = setup64()
    otf = fqpm_otf(grid, 0.25)
    zero = ScalarField(grid, np.zeros((64, 64)))
    i0 = fourier_filter_intensity(zero, otf, spec).values
    rng = np.random.default_rng(100)
    worst = 0.0
    for _ in range(20):
        phi = rand_field(grid, rng, scale=0.5)
        lhs = meta_intensity(phi, spec).values
        rhs = fourier_filter_intensity(phi, otf, spec).values - i0
        worst = max(worst, np.abs(lhs - rhs).max() / max(np.abs(rhs).max(), 1e-300))
    passed = worst <= 1e-12
    report("01", passed, f"factored vs filtered intensity, worst pointwise rel {worst:.2e} (tol 1e-12)")
    assert passed


def test_criterion_02_reference_intensity():
    grid, pupil, spec = setup64()
    otf = fqpm_otf(grid, 0.25)
    zero = ScalarField(grid, np.zeros((64, 64)))
    i0 = fourier_filter_intensity(zero, otf, spec).values
    hchi = hilbert2d_values(grid, pupil.indicator)
    ref = (hchi**2 + pupil.indicator**2) / 2.0
    worst = np.abs(i0 - ref).max() / ref.max()
    passed = worst <= 1e-12
    report("02", passed, f"flat-phase intensity closed form, rel defect {worst:.2e} (tol 1e-12)")
    assert passed


def test_criterion_03_double_path_identity():
    grid, pupil, spec = setup64()
    phi = smooth_phase(grid, 0.4)
    ip, im = path_intensities(phi, spec)
    raw = ip.values - im.values
    i1 = i1_apply(phi, spec).values
    scale = np.abs(i1).max()
    defect = np.abs(raw - i1).max() / scale
    masked = double_iquad(phi, spec).values
    outside = np.abs(masked[pupil.indicator == 0]).max() if (pupil.indicator == 0).any() else 0.0
    passed = defect <= 1e-12 and outside == 0.0
    report("03", passed, f"difference-signal identity rel {defect:.2e} (tol 1e-12), outside-pupil max {outside!r}")
    assert passed


def test_criterion_04_self_adjointness():
    grid, pupil, spec = setup64()
    d1 = ilin(spec).verify_adjoint(n_probes=50, seed=21)
    spec_mod = iquad_spec(pupil, modulation=tent_weight(grid, 4.0 / (32e-3)))
    d2 = ilin_modulated(spec_mod).verify_adjoint(n_probes=50, seed=22)
    worst = max(d1, d2)
    passed = worst <= 1e-10
    report("04", passed, f"adjoint defect over 50 probe pairs {worst:.2e} (tol 1e-10)")
    assert passed


def test_criterion_05_frechet_order():
    grid, pupil, spec = setup64()
    phi = smooth_phase(grid, 0.5)
    x = grid.coords
    X, Y = np.meshgrid(x, x, indexing="ij")
    psi = ScalarField(grid, np.cos(2 * np.pi * (2 * X - Y) / grid.extent))
    ts = np.array([1e-1, 3e-2, 1e-2, 3e-3])

    slopes = {}
    base_m = meta_intensity(phi, spec).values
    d_m = frechet(phi, spec).apply(psi).values
    errs = [
        np.linalg.norm(
            meta_intensity(ScalarField(grid, phi.values + t * psi.values), spec).values
            - base_m - t * d_m
        )
        for t in ts
    ]
    slopes["m"] = np.polyfit(np.log(ts), np.log(errs), 1)[0]

    base_d = double_iquad(phi, spec).values
    d_d = frechet_difference_signal(phi, spec).apply(psi).values
    errs = [
        np.linalg.norm(
            double_iquad(ScalarField(grid, phi.values + t * psi.values), spec).values
            - base_d - t * d_d
        )
        for t in ts
    ]
    slopes["dI"] = np.polyfit(np.log(ts), np.log(errs), 1)[0]

    zero = ScalarField(grid, np.zeros((64, 64)))
    probe = rand_field(grid, np.random.default_rng(7))
    red = np.abs(
        frechet(zero, spec).apply(probe).values - ilin(spec).apply(probe).values
    ).max() / max(np.abs(ilin(spec).apply(probe).values).max(), 1e-300)

    passed = all(abs(s - 2.0) <= 0.1 for s in slopes.values()) and red <= 1e-12
    report(
        "05",
        passed,
        f"remainder slopes m={slopes['m']:.3f}, dI={slopes['dI']:.3f} (2.0 +/- 0.1); "
        f"derivative-at-zero defect {red:.2e} (tol 1e-12)",
    )
    assert passed


def test_criterion_06_adjoint_consistency_vs_oracle():
    grid = make_grid(16, 4e-3, 2)
    pupil = circular_pupil(grid, 8)
    det = full_detector(grid)
    rng = np.random.default_rng(23)
    worst = 0.0
    for _ in range(5):
        phi = rand_field(grid, rng, scale=0.5)
        psi = rand_field(grid, rng)
        dat = rand_field(grid, rng)
        lhs = pv_frechet(phi, psi, pupil, det).inner(dat)
        rhs = psi.inner(pv_adjoint_l2(phi, dat, pupil, det))
        worst = max(worst, abs(lhs - rhs) / (psi.norm2() * dat.norm2()))
    passed = worst <= 1e-9
    report("06", passed, f"oracle inner-product defect at n=16: {worst:.2e} (tol 1e-9)")
    assert passed


def test_criterion_07_hilbert_properties():
    grid, pupil, spec = setup64()
    rng = np.random.default_rng(24)
    f = rand_field(grid, rng)
    g = rand_field(grid, rng)
    scale = np.abs(f.values).max()
    inv = np.abs(hilbert2d(hilbert2d(f)).values - off_axis_projector(f).values).max() / scale
    en = abs(hilbert2d(f).norm2() - off_axis_projector(f).norm2()) / off_axis_projector(f).norm2()
    sym = abs(hilbert2d(f).inner(g) - f.inner(hilbert2d(g))) / (f.norm2() * g.norm2())
    passed = inv <= 1e-12 and en <= 1e-12 and sym <= 1e-12
    report("07", passed, f"involution {inv:.2e}, energy {en:.2e}, symmetry {sym:.2e} (tol 1e-12)")
    assert passed


def _oracle_sweep():
    errs = {}
    for n in (16, 32, 64):
        grid = make_grid(n, 64.0 / n * 1e-3, 2)
        pupil = circular_pupil(grid, n // 2)
        spec = iquad_spec(pupil)
        phi = smooth_phase(grid, 0.3)
        masked = ScalarField(grid, pupil.indicator * phi.values)
        e_h = np.linalg.norm(hilbert2d(masked).values - pv_hilbert2d(masked).values) / np.linalg.norm(
            hilbert2d(masked).values
        )
        a1, b1 = i1_apply(phi, spec).values, pv_i1(phi, pupil).values
        e_1 = np.linalg.norm(a1 - b1) / np.linalg.norm(a1)
        al, bl = ilin(spec).apply(phi).values, pv_ilin(phi, pupil).values
        e_l = np.linalg.norm(al - bl) / np.linalg.norm(al)
        errs[n] = {"H": e_h, "i1": e_1, "ilin": e_l}
    return errs


def test_criterion_08a_oracle_convergence_monotone():
    errs = _oracle_sweep()
    mono = all(errs[16][k] > errs[32][k] > errs[64][k] for k in ("H", "i1", "ilin"))
    detail = "; ".join(
        f"{k}: " + " > ".join(f"{errs[n][k]:.3f}" for n in (16, 32, 64)) for k in ("H", "i1", "ilin")
    )
    report("08a", mono, f"spectral/quadrature distance decreases with n ({detail})")
    assert mono


def test_criterion_08b_oracle_convergence_tolerance():
    # Faithful to the stated 10% bound at n = 32, which is unattainable
    # under the pinned design (plain midpoint weights, hard pupil edge,
    # periodic pad-2 spectral path): the wraparound floor alone is ~11%.
    errs = _oracle_sweep()
    worst = max(errs[32].values())
    passed = worst <= 0.10
    report(
        "08b",
        passed,
        f"n=32 agreement worst {worst:.3f} vs stated tol 0.10 "
        f"(H {errs[32]['H']:.3f}, i1 {errs[32]['i1']:.3f}, ilin {errs[32]['ilin']:.3f}); "
        "bound kept faithful although unattainable under the pinned design",
    )
    assert passed


def test_criterion_09_flux_conservation():
    grid, pupil, spec = setup64()
    phi = smooth_phase(grid, 0.4)
    worst = 0.0
    for dol in (0.0, 0.25, 0.5, -0.25):
        otf = fqpm_otf(grid, dol, axis_mode="quadrant")
        total = fourier_filter_intensity(phi, otf, spec).values.sum()
        worst = max(worst, abs(total - pupil.count) / pupil.count)
    rng = np.random.default_rng(25)
    rand_otf = ComplexField(grid, np.exp(1j * rng.uniform(0, 2 * np.pi, (64, 64))))
    total = fourier_filter_intensity(phi, rand_otf, spec).values.sum()
    worst = max(worst, abs(total - pupil.count) / pupil.count)
    passed = worst <= 1e-12
    report("09", passed, f"unit-modulus mask flux defect {worst:.2e} (tol 1e-12)")
    assert passed


def test_criterion_10_poorly_seen_mode():
    grid, pupil, spec = setup64()
    modes = [noll_index(j) for j in range(2, 12)]
    from iquad.sensors import sensitivity_scan

    rows = {(z.n, z.m): r for z, r in sensitivity_scan(spec, modes, amplitude=1e-3)}
    med = float(np.median(list(rows.values())))
    ratio = med / rows[(2, 2)]
    passed = ratio >= 10.0
    report("10", passed, f"median/vertical-astigmatism sensitivity ratio {ratio:.1f} (>= 10 required; measured 15.3 at freeze)")
    assert passed


def test_criterion_11_modulation_limit():
    grid, pupil, spec = setup64()
    phi = smooth_phase(grid, 0.3)
    spec_delta = iquad_spec(pupil, modulation=delta_weight(grid))
    a = modulated_meta_intensity(phi, spec_delta).values
    b = meta_intensity(phi, spec).values
    d_meta = np.abs(a - b).max() / np.abs(b).max()
    d_op = np.abs(
        ilin_modulated(spec_delta).apply(phi).values - ilin(spec).apply(phi).values
    ).max() / np.abs(ilin(spec).apply(phi).values).max()
    probe = zernike_mode(grid, pupil, noll_index(8), rms=1.0)
    spec_tent = iquad_spec(pupil, modulation=tent_weight(grid, 4.0 / (32e-3)))
    sens_mod = ilin_modulated(spec_tent).apply(probe).norm2()
    sens_un = ilin(spec).apply(probe).norm2()
    passed = d_meta <= 1e-12 and d_op <= 1e-12 and sens_mod <= sens_un
    report(
        "11",
        passed,
        f"delta-limit defects {d_meta:.2e}/{d_op:.2e} (tol 1e-12); "
        f"tent sensitivity {sens_mod:.3e} <= unmodulated {sens_un:.3e}",
    )
    assert passed


def test_criterion_12_reconstruction():
    grid, pupil, spec = setup64()
    basis = [2, 3, 5, 13, 15, 18, 23, 25, 27, 41]  # observable-mode basis
    coeffs = np.random.default_rng(0).standard_normal(10)
    coeffs *= 0.1 / np.linalg.norm(coeffs)
    vals = sum(
        c * zernike_mode(grid, pupil, noll_index(j), rms=1.0).values
        for j, c in zip(basis, coeffs)
    )
    truth = ScalarField(grid, vals)
    op = ilin(spec)
    data = op.apply(truth)
    lw = landweber_linear(data, op, ReconstructionConfig(max_iters=500), truth=truth, pupil=pupil)
    monotone = all(a >= b * (1 - 1e-12) for a, b in zip(lw.residuals, lw.residuals[1:]))
    cg = cg_normal(
        data,
        op,
        ReconstructionConfig(method="cg", max_iters=100, residual_tol=1e-12),
        truth=truth,
        pupil=pupil,
    )
    passed = (
        lw.rel_error <= 0.05
        and monotone
        and cg.iterations <= 100
        and cg.rel_error <= max(lw.rel_error, 0.05)
    )
    report(
        "12",
        passed,
        f"ten-mode recovery: fixed-step {lw.rel_error:.4f} in {lw.iterations} iters "
        f"(monotone={monotone}), cg {cg.rel_error:.4f} in {cg.iterations} iters (tol 0.05)",
    )
    assert passed


def test_criterion_13_pixel_efficiency():
    worsts = []
    for d in (32, 48):
        grid = make_grid(2 * d, 1e-3, 2)
        pupil = circular_pupil(grid, d)
        spec = iquad_spec(pupil)
        phi = smooth_phase(grid, 0.1)
        resp = ilin(spec).apply(phi).values
        active = max(int(np.count_nonzero(np.abs(resp) > 1e-3 * np.abs(resp).max())), 1)
        ratio = 4.0 * pupil.count / active
        worsts.append(ratio)
    passed = all(r >= 3.8 for r in worsts)
    report("13", passed, f"four-image pixel budget over signal support: ratios {[f'{r:.2f}' for r in worsts]} (>= 3.8)")
    assert passed
