import json
import struct

import numpy as np
import pytest

from phaseholo.charts import shipped_chart, usaf_chart
from phaseholo.gridio import FormatError, read_grid, read_pgm, write_grid, write_pgm


class TestGrid:
    def test_roundtrip(self, tmp_path, rng):
        v = rng.normal(size=(5, 7)) + 1j * rng.normal(size=(5, 7))
        b, j = write_grid(tmp_path / "f", v, 1.5e-4, distance_m=0.02)
        assert b.name == "f.bin" and j.name == "f.json"
        back, dx, side = read_grid(tmp_path / "f.bin")
        np.testing.assert_array_equal(back, v)
        assert dx == 1.5e-4 and side["distance_m"] == 0.02

    def test_byte_layout(self, tmp_path):
        v = np.array([[1 + 2j, 3 + 4j], [5 + 6j, 7 + 8j]])
        write_grid(tmp_path / "g.bin", v, 1.0)
        raw = (tmp_path / "g.bin").read_bytes()
        # little-endian float64 (re, im) pairs, first index slowest
        assert struct.unpack("<8d", raw) == (1, 2, 3, 4, 5, 6, 7, 8)
        assert json.loads((tmp_path / "g.json").read_text()) == \
            {"nx": 2, "ny": 2, "dx_m": 1.0, "kind": "complex128"}

    def test_truncated(self, tmp_path):
        write_grid(tmp_path / "g", np.ones((3, 3)), 1.0)
        (tmp_path / "g.bin").write_bytes((tmp_path / "g.bin").read_bytes()[:-1])
        with pytest.raises(FormatError, match="bytes"):
            read_grid(tmp_path / "g")

    def test_missing_sidecar(self, tmp_path):
        (tmp_path / "g.bin").write_bytes(b"")
        with pytest.raises(FormatError, match="sidecar"):
            read_grid(tmp_path / "g")

    def test_wrong_kind(self, tmp_path):
        write_grid(tmp_path / "g", np.ones((2, 2)), 1.0, kind="float32")
        with pytest.raises(FormatError, match="kind"):
            read_grid(tmp_path / "g")


class TestPgm:
    def test_roundtrip(self, tmp_path):
        img = usaf_chart(64)
        write_pgm(tmp_path / "c.pgm", img)
        raw = (tmp_path / "c.pgm").read_bytes()
        assert raw.startswith(b"P5\n64 64\n255\n") and len(raw) == 13 + 64 * 64
        np.testing.assert_array_equal(read_pgm(tmp_path / "c.pgm"), img)

    def test_rows_map_to_first_axis(self, tmp_path):
        img = np.zeros((4, 4))
        img[1, 3] = 1.0
        write_pgm(tmp_path / "a.pgm", img)
        assert (tmp_path / "a.pgm").read_bytes()[-16:][1 * 4 + 3] == 255
        assert read_pgm(tmp_path / "a.pgm")[1, 3] == 1.0

    def test_not_p5(self, tmp_path):
        (tmp_path / "a.pgm").write_bytes(b"P2\n2 2\n255\n0 0 0 0\n")
        with pytest.raises(FormatError, match="P5"):
            read_pgm(tmp_path / "a.pgm")

    def test_not_square(self, tmp_path):
        write_pgm(tmp_path / "a.pgm", np.zeros((4, 6)))
        with pytest.raises(FormatError, match="square"):
            read_pgm(tmp_path / "a.pgm")


class TestCharts:
    @pytest.mark.parametrize("n", [64, 256])
    def test_shipped_matches_generator(self, n):
        np.testing.assert_array_equal(read_pgm(shipped_chart(n)), usaf_chart(n))

    def test_binary_and_nontrivial(self):
        img = usaf_chart(256)
        assert set(np.unique(img)) == {0.0, 1.0}
        assert 0.05 < img.mean() < 0.3

    def test_bad_size(self):
        with pytest.raises(ValueError):
            usaf_chart(100)
