"""Command-line interface.

Grammar::

    iquad <simulate|verify|reconstruct|compare|scan> --config PATH
          [--seed N] [--out DIR] [key=value ...]

Configuration is a flat ``key=value`` text file ('#' starts a comment);
command-line ``key=value`` pairs override file entries.  Exit codes:
0 success, 1 invariant failure, 2 usage or configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io as iqio
from .grid import ScalarField, circular_pupil, make_grid
from .linops import ilin, ilin_modulated, interaction_matrix
from .reconstruct import (
    ReconstructionConfig,
    cg_normal,
    landweber_linear,
    landweber_nonlinear,
    modal_solve,
)
from .screens import ScreenParams, kolmogorov_screen
from .sensors import (
    Measurement,
    double_iquad,
    fourier_filter_intensity,
    fqpm_otf,
    iquad_spec,
    meta_intensity,
    modulated_meta_intensity,
    path_intensities,
    pwfs_sensitivity_scan,
    pwfs_slopes,
    sensitivity_scan,
)
from .spectral import delta_weight, tent_weight
from .verify import VerifyConfig, run_checks
from .zernike import noll_index, zernike_mode

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_USAGE = 2
EXIT_IO = 3

_DEFAULTS = {
    "n": "64",
    "pitch": "1e-3",
    "pad_factor": "2",
    "pupil_diameter": "32",
    "delta_over_lambda": "0.25",
    "wavelength": "500e-9",
    "modulation_profile": "none",
    "modulation_radius": "0",  # in lambda/D units
    "phase_source": "zernike",
    "zernike_noll": "4:0.1",
    "screen_r0": "0.1",
    "screen_L0": "25",
    "phase_file": "",
    "seed": "0",
    "method": "landweber-linear",
    "tau": "",
    "max_iters": "500",
    "residual_tol": "1e-10",
    "s": "1.8333333333333333",
    "alpha": "",
    "basis_nolls": "2-11",
    "amplitude": "1e-3",
    "verify_n_spectral": "64",
    "verify_n_oracle": "16",
    "verify_n_raw": "12",
    "fault": "",
}


class ConfigError(Exception):
    pass


def parse_config(path: str | None, overrides: list[str]) -> dict[str, str]:
    cfg = dict(_DEFAULTS)
    if path:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {path}")
        for ln, line in enumerate(p.read_text().splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{ln}: expected key=value, got {line!r}")
            k, v = line.split("=", 1)
            cfg[k.strip()] = v.strip()
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must be key=value, got {item!r}")
        k, v = item.split("=", 1)
        cfg[k.strip()] = v.strip()
    return cfg


def serialize_config(cfg: dict[str, str]) -> str:
    return "".join(f"{k}={cfg[k]}\n" for k in sorted(cfg))


def _build_setup(cfg: dict[str, str]):
    grid = make_grid(int(cfg["n"]), float(cfg["pitch"]), int(cfg["pad_factor"]))
    pupil = circular_pupil(grid, int(cfg["pupil_diameter"]))
    modulation = None
    profile = cfg["modulation_profile"]
    if profile == "tent":
        d_phys = pupil.diameter_samples * grid.pitch
        modulation = tent_weight(grid, float(cfg["modulation_radius"]) / d_phys)
    elif profile == "delta":
        modulation = delta_weight(grid)
    elif profile != "none":
        raise ConfigError(f"unknown modulation_profile {profile!r}")
    spec = iquad_spec(pupil, modulation=modulation)
    return grid, pupil, spec


def _parse_noll_coeffs(text: str) -> list[tuple[int, float]]:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        j, _, c = tok.partition(":")
        out.append((int(j), float(c) if c else 1.0))
    if not out:
        raise ConfigError("empty Zernike mode list")
    return out


def _parse_noll_range(text: str):
    if "-" in text:
        a, b = text.split("-", 1)
        return [noll_index(j) for j in range(int(a), int(b) + 1)]
    return [noll_index(int(tok)) for tok in text.split(",") if tok.strip()]


def _build_phase(cfg: dict[str, str], grid, pupil) -> ScalarField:
    source = cfg["phase_source"]
    if source == "zernike":
        vals = np.zeros((grid.n, grid.n))
        for j, coeff in _parse_noll_coeffs(cfg["zernike_noll"]):
            vals += zernike_mode(grid, pupil, noll_index(j), rms=coeff).values
        return ScalarField(grid, vals)
    if source == "screen":
        params = ScreenParams(
            r0=float(cfg["screen_r0"]), L0=float(cfg["screen_L0"]), seed=int(cfg["seed"])
        )
        screen = kolmogorov_screen(grid, params)
        return ScalarField(grid, screen.values * pupil.indicator)
    if source == "file":
        f, _ = iqio.read_field(cfg["phase_file"], pad_factor=grid.pad_factor)
        if f.grid.n != grid.n:
            raise ConfigError(f"phase file grid {f.grid.n} does not match n={grid.n}")
        return ScalarField(grid, f.values)
    raise ConfigError(f"unknown phase_source {source!r}")


def _out_dir(cfg: dict[str, str], args) -> Path:
    out = Path(args.out or cfg.get("out", "iquad-out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _fmt(x: float) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# commands

def cmd_simulate(cfg: dict[str, str], args) -> int:
    grid, pupil, spec = _build_setup(cfg)
    out = _out_dir(cfg, args)
    phase = _build_phase(cfg, grid, pupil)
    zero = ScalarField(grid, np.zeros((grid.n, grid.n)))
    otf = fqpm_otf(grid, float(cfg["delta_over_lambda"]))
    i_phi = fourier_filter_intensity(phase, otf, spec)
    i_ref = fourier_filter_intensity(zero, otf, spec)
    if spec.is_iquad and spec.modulation is None:
        meta = meta_intensity(phase, spec)
    elif spec.is_iquad:
        meta = modulated_meta_intensity(phase, spec)
    else:
        meta = Measurement(
            "meta-intensity",
            (ScalarField(grid, i_phi.values - i_ref.values),),
            spec.pupil.flux,
        )
    ip, im = path_intensities(phase, spec)
    di = double_iquad(phase, spec)

    manifest = {"config": {k: cfg[k] for k in sorted(cfg)}}
    for name, fld, kind in [
        ("phase", phase, "phase"),
        ("intensity", i_phi.field, "intensity"),
        ("reference", i_ref.field, "intensity"),
        ("meta", meta.field, "meta"),
        ("path_plus", ip.field, "intensity"),
        ("path_minus", im.field, "intensity"),
        ("difference", di.field, "double-diff"),
    ]:
        iqio.write_field(out / f"{name}.iqf", fld, kind=kind)
        iqio.write_field_png(out / f"{name}.png", fld, kind=kind)
        manifest[name] = {
            "flux": _fmt(fld.values.sum() * grid.cell_area),
            "norm2": _fmt(np.sqrt((fld.values**2).sum() * grid.cell_area)),
        }
    manifest["flux_checks"] = {
        "pupil_flux": _fmt(pupil.flux),
        "path_sum_flux": _fmt((ip.values + im.values).sum() * grid.cell_area),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(f"simulate: wrote 7 fields to {out}")
    return EXIT_OK


def cmd_verify(cfg: dict[str, str], args) -> int:
    vcfg = VerifyConfig(
        n_spectral=int(cfg["verify_n_spectral"]),
        n_oracle=int(cfg["verify_n_oracle"]),
        n_raw=int(cfg["verify_n_raw"]),
        seed=int(cfg["seed"]),
        fault=cfg["fault"] or None,
    )
    results = run_checks(vcfg)
    for r in results:
        print(r.row())
    out = _out_dir(cfg, args)
    table = [
        {
            "name": r.name,
            "passed": bool(r.passed),
            "measured": float(r.measured),
            "tolerance": float(r.tolerance),
            "detail": r.detail,
        }
        for r in results
    ]
    (out / "verify_report.json").write_text(json.dumps(table, indent=2) + "\n")
    failed = [r for r in results if not r.passed]
    print(f"verify: {len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_INVARIANT if failed else EXIT_OK


def cmd_reconstruct(cfg: dict[str, str], args) -> int:
    grid, pupil, spec = _build_setup(cfg)
    out = _out_dir(cfg, args)
    truth = _build_phase(cfg, grid, pupil)
    method = cfg["method"]
    rcfg = ReconstructionConfig(
        method=method,
        tau=float(cfg["tau"]) if cfg["tau"] else None,
        max_iters=int(cfg["max_iters"]),
        residual_tol=float(cfg["residual_tol"]),
        s=float(cfg["s"]),
    )
    op = ilin_modulated(spec) if spec.modulation is not None else ilin(spec)
    if method == "landweber-linear":
        data = op.apply(truth)
        report = landweber_linear(data, op, rcfg, truth=truth, pupil=pupil)
    elif method == "cg":
        data = op.apply(truth)
        report = cg_normal(data, op, rcfg, truth=truth, pupil=pupil)
    elif method == "landweber-nonlinear":
        data = double_iquad(truth, spec)
        report = landweber_nonlinear(data, spec, rcfg, truth=truth)
    elif method == "modal":
        basis = _parse_noll_range(cfg["basis_nolls"])
        matrix = interaction_matrix(op, basis, pupil)
        data = op.apply(truth)
        alpha = float(cfg["alpha"]) if cfg["alpha"] else None
        report = modal_solve(data, matrix, basis, pupil, alpha=alpha, truth=truth)
        iqio.write_matrix(out / "interaction.mat", matrix, basis, pupil)
    else:
        raise ConfigError(f"unknown method {method!r}")
    iqio.write_report(out / "report.json", report)
    iqio.write_field(out / "estimate.iqf", report.estimate, kind="phase")
    iqio.write_field(out / "truth.iqf", truth, kind="phase")
    with open(out / "residuals.csv", "w") as fh:
        fh.write("iteration,residual\n")
        for i, r in enumerate(report.residuals):
            fh.write(f"{i},{r!r}\n")
    err = "n/a" if report.rel_error is None else f"{report.rel_error:.3e}"
    print(
        f"reconstruct[{method}]: {report.iterations} iterations, "
        f"rel_error={err}, converged={report.converged}, stagnated={report.stagnated}"
    )
    return EXIT_OK


def cmd_compare(cfg: dict[str, str], args) -> int:
    grid, pupil, spec = _build_setup(cfg)
    out = _out_dir(cfg, args)
    phase = _build_phase(cfg, grid, pupil)

    # (a) pixel budget: linear-signal support vs the four-pupil layout
    op = ilin(spec)
    resp = op.apply(phase).values
    active = int(np.count_nonzero(np.abs(resp) > 1e-3 * np.abs(resp).max()))
    active = max(active, 1)
    pwfs_pixels = 4 * pupil.count
    ratio = pwfs_pixels / active
    pixel_table = {
        "iquad_signal_pixels": active,
        "pupil_pixels": pupil.count,
        "pwfs_required_pixels": pwfs_pixels,
        "ratio_pwfs_over_iquad": ratio,
    }

    # (b) side-by-side slope maps and linear response for the common phase
    slopes = pwfs_slopes(phase, spec)
    iqio.write_field(out / "slope_x.iqf", slopes.fields[0], kind="slopes-x")
    iqio.write_field(out / "slope_y.iqf", slopes.fields[1], kind="slopes-y")
    iqio.write_field(out / "ilin_response.iqf", ScalarField(grid, resp), kind="meta")
    for name in ("slope_x", "slope_y", "ilin_response"):
        f, kind = iqio.read_field(out / f"{name}.iqf")
        iqio.write_field_png(out / f"{name}.png", f, kind=kind)

    # (c) modal sensitivity tables for both sensors
    basis = _parse_noll_range(cfg["basis_nolls"])
    amp = float(cfg["amplitude"])
    rows_iq = sensitivity_scan(spec, basis, amplitude=amp)
    rows_pw = pwfs_sensitivity_scan(spec, basis, amplitude=amp)
    with open(out / "sensitivity.csv", "w") as fh:
        fh.write("n,m,iquad_response,pwfs_response\n")
        for (idx, a), (_, b) in zip(rows_iq, rows_pw):
            fh.write(f"{idx.n},{idx.m},{a!r},{b!r}\n")

    (out / "compare.json").write_text(json.dumps(pixel_table, indent=2, sort_keys=True) + "\n")
    print(f"compare: PWFS/iQuad pixel ratio = {ratio:.2f} (table in {out})")
    return EXIT_OK


def cmd_scan(cfg: dict[str, str], args) -> int:
    grid, pupil, spec = _build_setup(cfg)
    out = _out_dir(cfg, args)
    basis = _parse_noll_range(cfg["basis_nolls"])
    rows = sensitivity_scan(spec, basis, amplitude=float(cfg["amplitude"]))
    with open(out / "scan.csv", "w") as fh:
        fh.write("n,m,response\n")
        for idx, r in rows:
            fh.write(f"{idx.n},{idx.m},{r!r}\n")
    for idx, r in rows:
        print(f"Z(n={idx.n}, m={idx.m:+d})  response = {r:.6e}")
    return EXIT_OK


_COMMANDS = {
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "reconstruct": cmd_reconstruct,
    "compare": cmd_compare,
    "scan": cmd_scan,
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="iquad", description=__doc__)
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", default=None, help="flat key=value config file")
    parser.add_argument("--seed", type=int, default=None, help="override the seed")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("overrides", nargs="*", help="key=value overrides")
    try:
        args = parser.parse_intermixed_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        cfg = parse_config(args.config, args.overrides)
        if args.seed is not None:
            cfg["seed"] = str(args.seed)
        return _COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
