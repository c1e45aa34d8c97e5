import json

import numpy as np
import pytest

from iquad.cli import EXIT_INVARIANT, EXIT_IO, EXIT_OK, EXIT_USAGE, main, parse_config, serialize_config


def run(tmp_path, command, *overrides, config=None, out=None):
    argv = [command]
    if config is not None:
        argv += ["--config", str(config)]
    argv += ["--out", str(out or tmp_path / "out")]
    argv += list(overrides)
    return main(argv)


class TestConfig:
    def test_round_trip_identity(self, tmp_path):
        p = tmp_path / "a.cfg"
        p.write_text("n=32\npitch=2e-3\n# comment\npupil_diameter=16\n")
        cfg = parse_config(str(p), ["seed=3"])
        text = serialize_config(cfg)
        p2 = tmp_path / "b.cfg"
        p2.write_text(text)
        cfg2 = parse_config(str(p2), [])
        assert cfg == cfg2
        assert serialize_config(cfg2) == text

    def test_missing_file(self, tmp_path):
        rc = run(tmp_path, "simulate", config=tmp_path / "absent.cfg")
        assert rc == EXIT_USAGE

    def test_bad_override(self, tmp_path):
        assert run(tmp_path, "simulate", "oops") == EXIT_USAGE

    def test_bad_value(self, tmp_path):
        assert run(tmp_path, "simulate", "n=banana") == EXIT_USAGE


class TestSimulate:
    def test_zero_phase_outputs(self, tmp_path):
        out = tmp_path / "out"
        rc = run(tmp_path, "simulate", "zernike_noll=4:0.0", "n=32", "pupil_diameter=16", out=out)
        assert rc == EXIT_OK
        # identical intensity and reference panels, mid-gray meta panel
        assert (out / "intensity.png").read_bytes() == (out / "reference.png").read_bytes()
        from PIL import Image

        meta = np.asarray(Image.open(out / "meta.png"))
        assert np.all(meta == 128)

    def test_manifest_flux_bookkeeping(self, tmp_path):
        out = tmp_path / "out"
        rc = run(tmp_path, "simulate", "n=32", "pupil_diameter=16", "zernike_noll=4:0.1", out=out)
        assert rc == EXIT_OK
        doc = json.loads((out / "manifest.json").read_text())
        assert set(doc) >= {"phase", "intensity", "reference", "meta", "path_plus", "path_minus", "difference"}
        # two-path flux bookkeeping recorded against the pupil flux
        assert float(doc["flux_checks"]["path_sum_flux"]) <= float(doc["flux_checks"]["pupil_flux"])

    def test_deterministic_manifest(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        for out in (out1, out2):
            rc = run(
                tmp_path, "simulate", "phase_source=screen", "n=32", "pupil_diameter=16",
                "seed=9", out=out,
            )
            assert rc == EXIT_OK
        assert (out1 / "manifest.json").read_bytes() == (out2 / "manifest.json").read_bytes()


class TestVerify:
    def test_default_passes(self, tmp_path):
        rc = run(tmp_path, "verify", "verify_n_spectral=32")
        assert rc == EXIT_OK
        table = json.loads((tmp_path / "out" / "verify_report.json").read_text())
        assert all(row["passed"] for row in table)

    def test_small_oracle_tier_subset(self, tmp_path):
        rc = run(tmp_path, "verify", "verify_n_spectral=16", "verify_n_oracle=16", "verify_n_raw=8")
        assert rc == EXIT_OK

    def test_injected_sign_error_detected(self, tmp_path):
        rc = run(tmp_path, "verify", "verify_n_spectral=32", "fault=hilbert-sign")
        assert rc == EXIT_INVARIANT
        table = json.loads((tmp_path / "out" / "verify_report.json").read_text())
        failed = {row["name"] for row in table if not row["passed"]}
        assert "difference signal equals i1" in failed


class TestReconstruct:
    def test_modal_run(self, tmp_path):
        out = tmp_path / "out"
        rc = run(
            tmp_path, "reconstruct", "method=modal", "n=32", "pupil_diameter=16",
            "basis_nolls=2-8", "zernike_noll=4:0.05,5:0.02", out=out,
        )
        assert rc == EXIT_OK
        doc = json.loads((out / "report.json").read_text())
        assert doc["method"] == "modal"
        assert len(doc["coefficients"]) == 7
        assert (out / "interaction.mat").exists()
        assert (out / "estimate.iqf").exists()

    def test_landweber_run_writes_residual_csv(self, tmp_path):
        out = tmp_path / "out"
        rc = run(
            tmp_path, "reconstruct", "method=landweber-linear", "n=32", "pupil_diameter=16",
            "max_iters=40", "zernike_noll=5:0.05", out=out,
        )
        assert rc == EXIT_OK
        lines = (out / "residuals.csv").read_text().splitlines()
        assert lines[0] == "iteration,residual"
        assert len(lines) > 2

    def test_missing_phase_file(self, tmp_path):
        rc = run(tmp_path, "reconstruct", "phase_source=file", "phase_file=/nonexistent.iqf")
        assert rc in (EXIT_USAGE, EXIT_IO)


class TestCompare:
    def test_pixel_budget_and_tables(self, tmp_path):
        out = tmp_path / "out"
        rc = run(
            tmp_path, "compare", "n=64", "pupil_diameter=32", "basis_nolls=2-11",
            "zernike_noll=5:0.05,8:0.03", out=out,
        )
        assert rc == EXIT_OK
        doc = json.loads((out / "compare.json").read_text())
        assert doc["ratio_pwfs_over_iquad"] >= 3.8
        table = (out / "sensitivity.csv").read_text().splitlines()
        assert table[0] == "n,m,iquad_response,pwfs_response"
        # the vertical-astigmatism row must show the suppressed response
        rows = {tuple(map(int, ln.split(",")[:2])): float(ln.split(",")[2]) for ln in table[1:]}
        med = np.median(list(rows.values()))
        assert rows[(2, 2)] < med / 5

    def test_separable_phase_sy_panel_near_zero(self, tmp_path):
        out = tmp_path / "out"
        rc = run(
            tmp_path, "compare", "n=32", "pupil_diameter=16", "basis_nolls=2-6",
            "zernike_noll=2:0.05", out=out,  # pure x-tilt
        )
        assert rc == EXIT_OK
        from iquad.io import read_field

        sx, _ = read_field(out / "slope_x.iqf")
        sy, _ = read_field(out / "slope_y.iqf")
        assert np.abs(sy.values).max() <= 1e-6 * np.abs(sx.values).max()


class TestScan:
    def test_piston_zero_row(self, tmp_path, capsys):
        out = tmp_path / "out"
        rc = run(tmp_path, "scan", "n=32", "pupil_diameter=16", "basis_nolls=1-6", out=out)
        assert rc == EXIT_OK
        lines = (out / "scan.csv").read_text().splitlines()
        rows = {tuple(map(int, ln.split(",")[:2])): float(ln.split(",")[2]) for ln in lines[1:]}
        assert rows[(0, 0)] == pytest.approx(0.0, abs=1e-12)

    def test_usage_errors(self, tmp_path):
        assert main(["bogus-command"]) == EXIT_USAGE
        assert main([]) == EXIT_USAGE
