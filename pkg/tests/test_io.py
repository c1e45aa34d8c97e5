import numpy as np
import pytest

from iquad import io as iqio
from iquad.grid import ScalarField, circular_pupil, make_grid
from iquad.linops import ilin, interaction_matrix
from iquad.reconstruct import ReconstructionConfig, landweber_linear
from iquad.sensors import iquad_spec, pwfs_slopes
from iquad.zernike import noll_index

from conftest import rand_field


class TestRawField:
    def test_round_trip(self, tmp_path, grid64, rng):
        f = rand_field(grid64, rng)
        path = tmp_path / "f.iqf"
        iqio.write_field(path, f, kind="phase")
        back, kind = iqio.read_field(path)
        assert kind == "phase"
        assert back.grid.n == 64
        assert back.grid.pitch == pytest.approx(1e-3)
        np.testing.assert_array_equal(back.values, f.values)

    def test_header_is_32_bytes(self, tmp_path, grid64, rng):
        f = rand_field(grid64, rng)
        path = tmp_path / "f.iqf"
        iqio.write_field(path, f)
        raw = path.read_bytes()
        assert len(raw) == 32 + 8 * 64 * 64
        assert raw[:4] == b"IQF1"

    def test_bad_magic_rejected(self, tmp_path, grid64, rng):
        path = tmp_path / "f.iqf"
        iqio.write_field(path, rand_field(grid64, rng))
        data = bytearray(path.read_bytes())
        data[:4] = b"NOPE"
        path.write_bytes(bytes(data))
        with pytest.raises(ValueError, match="magic"):
            iqio.read_field(path)

    def test_truncation_rejected(self, tmp_path, grid64, rng):
        path = tmp_path / "f.iqf"
        iqio.write_field(path, rand_field(grid64, rng))
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(ValueError):
            iqio.read_field(path)


class TestCsv:
    def test_round_trip(self, tmp_path, rng):
        g = make_grid(16, 2.0, 2)
        f = rand_field(g, rng)
        path = tmp_path / "f.csv"
        iqio.write_field_csv(path, f)
        back = iqio.read_field_csv(path, pitch=2.0)
        np.testing.assert_allclose(back.values, f.values, rtol=1e-15)


class TestPng:
    def test_sidecar_records_normalization(self, tmp_path, grid64, rng):
        f = rand_field(grid64, rng)
        path = tmp_path / "f.png"
        iqio.write_field_png(path, f, kind="meta")
        sidecar = (tmp_path / "f.png.txt").read_text()
        assert f"min={float(f.values.min())!r}" in sidecar
        assert f"max={float(f.values.max())!r}" in sidecar
        assert "kind=meta" in sidecar

    def test_constant_field_mid_gray(self, tmp_path, grid64):
        from PIL import Image

        f = ScalarField(grid64, np.zeros((64, 64)))
        path = tmp_path / "zero.png"
        iqio.write_field_png(path, f)
        img = np.asarray(Image.open(path))
        assert np.all(img == 128)


class TestMeasurement:
    def test_slopes_write_two_fields(self, tmp_path, grid64, rng):
        pupil = circular_pupil(grid64, 32)
        spec = iquad_spec(pupil)
        m = pwfs_slopes(rand_field(grid64, rng, scale=0.1), spec)
        written = iqio.write_measurement(tmp_path / "slopes", m)
        assert len(written) == 3  # two fields plus sidecar
        sidecar = (tmp_path / "slopes.meta.txt").read_text()
        assert "kind=slopes" in sidecar
        assert f"flux_norm={m.flux_norm!r}" in sidecar


class TestMatrix:
    def test_round_trip_with_sidecar(self, tmp_path, grid64):
        pupil = circular_pupil(grid64, 32)
        spec = iquad_spec(pupil)
        basis = [noll_index(j) for j in (2, 3, 4)]
        m = interaction_matrix(ilin(spec), basis, pupil)
        path = tmp_path / "im.mat"
        iqio.write_matrix(path, m, basis, pupil)
        back, basis_back = iqio.read_matrix(path)
        np.testing.assert_array_equal(back, m)
        assert basis_back == basis
        assert "mask_sha256=" in (tmp_path / "im.mat.txt").read_text()


class TestReport:
    def test_json_document(self, tmp_path, grid64):
        import json

        pupil = circular_pupil(grid64, 32)
        spec = iquad_spec(pupil)
        op = ilin(spec)
        zero = ScalarField(grid64, np.zeros((64, 64)))
        rep = landweber_linear(zero, op, ReconstructionConfig(max_iters=5))
        path = tmp_path / "report.json"
        iqio.write_report(path, rep, extra={"note": "smoke"})
        doc = json.loads(path.read_text())
        assert doc["method"] == "landweber-linear"
        assert doc["converged"] is True
        assert doc["note"] == "smoke"
        assert isinstance(doc["residuals"], list)
