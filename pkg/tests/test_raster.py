import numpy as np
import pytest

from riverwse import raster
from riverwse.errors import NodataError, OutOfBoundsError, RasterFormatError


def make_grid(values, origin_x=0.0, origin_y=None, pixel_size=1.0, nodata=None):
    values = np.asarray(values, dtype=float)
    if origin_y is None:
        origin_y = values.shape[0] * pixel_size
    return raster.Grid(values=values,
                       transform=raster.GeoTransform(origin_x, origin_y, pixel_size),
                       nodata=nodata)


class TestAsciiGrid:
    def test_2x2_direct_transcription(self, tmp_path):
        p = tmp_path / "g.asc"
        p.write_text("ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n"
                     "NODATA_value -9999\n1 2\n3 4\n")
        g = raster.load_dsm_ascii(p)
        assert g.width == 2 and g.height == 2
        assert g.values.ravel().tolist() == [1, 2, 3, 4]
        assert g.transform.origin_x == 0 and g.transform.origin_y == 2
        assert g.nodata == -9999

    def test_count_mismatch(self, tmp_path):
        p = tmp_path / "g.asc"
        p.write_text("ncols 3\nnrows 3\nxllcorner 0\nyllcorner 0\ncellsize 1\n"
                     "1 2 3 4 5 6 7 8\n")
        with pytest.raises(RasterFormatError, match="expected 9"):
            raster.load_dsm_ascii(p)

    def test_missing_header_key_named(self, tmp_path):
        p = tmp_path / "g.asc"
        p.write_text("ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\n1 2 3 4\n")
        with pytest.raises(RasterFormatError, match="cellsize"):
            raster.load_dsm_ascii(p)

    def test_case_insensitive_keys(self, tmp_path):
        p = tmp_path / "g.asc"
        p.write_text("NCOLS 2\nNROWS 2\nXLLCORNER 1\nYLLCORNER 2\nCELLSIZE 0.5\n1 2 3 4\n")
        g = raster.load_dsm_ascii(p)
        assert g.transform.pixel_size == 0.5

    def test_round_trip_random_16x16(self, tmp_path):
        rng = np.random.default_rng(1)
        g = make_grid(rng.normal(200, 3, (16, 16)), origin_x=5.5, pixel_size=0.25,
                      nodata=-9999.0)
        raster.write_dsm_ascii(g, tmp_path / "g.asc")
        g2 = raster.load_dsm_ascii(tmp_path / "g.asc")
        np.testing.assert_array_equal(g.values, g2.values)
        assert g2.transform == g.transform
        assert g2.nodata == g.nodata


class TestPgm:
    def test_all_zero_image(self, tmp_path):
        raster.write_pgm(np.zeros((4, 4), dtype=np.uint8), tmp_path / "o.pgm")
        t = raster.GeoTransform(0, 4, 1.0)
        raster.write_worldfile(t, tmp_path / "o.wld")
        g = raster.load_ortho_pgm(tmp_path / "o.pgm", tmp_path / "o.wld")
        assert g.values.sum() == 0
        assert g.transform == t

    def test_rotation_term_rejected(self, tmp_path):
        raster.write_pgm(np.zeros((4, 4), dtype=np.uint8), tmp_path / "o.pgm")
        (tmp_path / "o.wld").write_text("1.0\n0.1\n0.0\n-1.0\n0.5\n3.5\n")
        with pytest.raises(RasterFormatError, match="rotat"):
            raster.load_ortho_pgm(tmp_path / "o.pgm", tmp_path / "o.wld")

    def test_gradient_round_trip(self, tmp_path):
        values = np.arange(256, dtype=np.uint8).reshape(16, 16)
        raster.write_pgm(values, tmp_path / "o.pgm")
        raster.write_worldfile(raster.GeoTransform(10, 30, 2.0), tmp_path / "o.wld")
        g = raster.load_ortho_pgm(tmp_path / "o.pgm", tmp_path / "o.wld")
        np.testing.assert_array_equal(g.values, values)

    def test_bad_maxval(self, tmp_path):
        (tmp_path / "o.pgm").write_bytes(b"P5\n2 2\n100\n" + bytes(4))
        raster.write_worldfile(raster.GeoTransform(0, 2, 1.0), tmp_path / "o.wld")
        with pytest.raises(RasterFormatError, match="maxval"):
            raster.load_ortho_pgm(tmp_path / "o.pgm", tmp_path / "o.wld")


class TestBilinear:
    def test_pixel_center_identity(self):
        g = make_grid([[1, 2], [3, 4]])
        # center of pixel (0, 0) is at world (0.5, 1.5)
        assert raster.sample_bilinear(g, 0.5, 1.5) == 1.0
        assert raster.sample_bilinear(g, 1.5, 0.5) == 4.0

    def test_symmetric_midpoint(self):
        g = make_grid([[0, 0], [10, 10]])
        assert raster.sample_bilinear(g, 1.0, 1.0) == pytest.approx(5.0)

    def test_matches_closed_form_oracle(self):
        rng = np.random.default_rng(7)
        g = make_grid(rng.normal(size=(8, 8)), origin_x=3.0, pixel_size=0.5)
        for _ in range(100):
            x = rng.uniform(3.25, 3.25 + 3.5)
            y = rng.uniform(0.25, 0.25 + 3.5)
            # independent direct evaluation of the bilinear formula
            col = (x - 3.0) / 0.5 - 0.5
            row = (8 * 0.5 - y) / 0.5 - 0.5
            c0, r0 = int(col), int(row)
            fc, fr = col - c0, row - r0
            v = g.values
            expected = (v[r0, c0] * (1 - fc) * (1 - fr) + v[r0, c0 + 1] * fc * (1 - fr)
                        + v[r0 + 1, c0] * (1 - fc) * fr + v[r0 + 1, c0 + 1] * fc * fr)
            assert raster.sample_bilinear(g, x, y) == pytest.approx(expected, abs=1e-12)

    def test_out_of_hull(self):
        g = make_grid([[1, 2], [3, 4]])
        with pytest.raises(OutOfBoundsError):
            raster.sample_bilinear(g, 0.4, 0.4)

    def test_nodata_neighbor(self):
        g = make_grid([[1, -9999], [3, 4]], nodata=-9999)
        with pytest.raises(NodataError):
            raster.sample_bilinear(g, 1.0, 1.0)

    def test_pixel_world_round_trip(self):
        t = raster.GeoTransform(100.0, 250.0, 0.02)
        for col, row in [(0, 0), (3, 7), (255, 255)]:
            x, y = t.pixel_corner_to_world(col, row)
            c2, r2 = t.world_to_pixel_corner(x, y)
            assert abs(c2 - col) < 1e-9 and abs(r2 - row) < 1e-9


class TestExtractPatch:
    def test_constant_grid(self):
        g = make_grid(np.full((30, 30), 7.5))
        patch = raster.extract_patch(g, 15, 15, side=10, out_px=32)
        assert np.all(patch.values == 7.5)

    def test_exact_on_plane(self):
        n = 40
        xs = np.arange(n) + 0.5
        ys = (n - np.arange(n)) - 0.5
        plane = 0.01 * xs[None, :] + 0.02 * ys[:, None]
        g = make_grid(plane)
        patch = raster.extract_patch(g, 20, 20, side=10, out_px=64)
        px = 20 - 5 + (np.arange(64) + 0.5) * (10 / 64)
        py = 20 + 5 - (np.arange(64) + 0.5) * (10 / 64)
        expected = 0.01 * px[None, :] + 0.02 * py[:, None]
        np.testing.assert_allclose(patch.values, expected, atol=1e-9)

    def test_output_pitch(self):
        g = make_grid(np.zeros((30, 30)))
        patch = raster.extract_patch(g, 15, 15, side=10.0, out_px=256)
        assert patch.transform.pixel_size == pytest.approx(10 / 256)

    def test_out_of_bounds(self):
        g = make_grid(np.zeros((12, 12)))
        with pytest.raises(OutOfBoundsError):
            raster.extract_patch(g, 2, 2, side=10, out_px=16)

    def test_native_resolution_reproduces_source(self):
        rng = np.random.default_rng(3)
        g = make_grid(rng.normal(size=(20, 20)))
        # 8x8 meter square at native 1 m pitch: output centers coincide with
        # source pixel centers
        patch = raster.extract_patch(g, 10, 10, side=8, out_px=8)
        np.testing.assert_allclose(patch.values, g.values[6:14, 6:14], atol=1e-12)
