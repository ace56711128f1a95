import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from phaseholo.cli import main
from phaseholo.gridio import read_grid, write_grid, write_pgm

K = 2 * np.pi * 2e6 / 1480.0


@pytest.fixture
def demo_points(tmp_path):
    path = tmp_path / "demo.json"
    path.write_text(json.dumps({"id": 0, "points": [{"pos": [0.01, 0.0, 0.09], "amp": 700.0},
                                                    {"pos": [-0.01, 0.01, 0.11], "amp": 800.0}]}))
    return path


class TestOptimizePat:
    def test_outputs(self, tmp_path, demo_points, capsys):
        out = tmp_path / "a"
        code = main(["optimize-pat", "--array", "single-sided-14", "--points", str(demo_points),
                     "--iters", "150", "--seed", "7", "--out", str(out)])
        assert code == 0
        assert {p.name for p in out.iterdir()} == {"phases.json", "record.json", "config.json",
                                                   "field_z0.1.bin", "field_z0.1.json"}
        phases = json.loads((out / "phases.json").read_text())
        assert len(phases) == 196
        rec = json.loads((out / "record.json").read_text())
        assert abs(rec["rp_mean"][-1] - 1) < 0.01
        field, dx, side = read_grid(out / "field_z0.1")
        assert field.shape == (101, 101) and side["z_m"] == 0.1
        assert "mean R_p" in capsys.readouterr().out

    def test_deterministic(self, tmp_path, demo_points):
        for name in ("a", "b"):
            main(["optimize-pat", "--points", str(demo_points), "--iters", "20", "--seed", "3",
                  "--out", str(tmp_path / name)])
        assert (tmp_path / "a/phases.json").read_bytes() == (tmp_path / "b/phases.json").read_bytes()

    def test_inline_points_and_config(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"iters": 5, "slice-n": 11}))
        out = tmp_path / "c"
        assert main(["optimize-pat", "--config", str(cfg), "--point", "0,0,0.1,1000",
                     "--iters", "7", "--out", str(out)]) == 0
        snap = json.loads((out / "config.json").read_text())
        assert snap["iters"] == 7 and snap["slice_n"] == 11
        assert json.loads((out / "record.json").read_text())["iterations"] == 7

    def test_unknown_config_key(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"itres": 5}))
        with pytest.raises(SystemExit) as exc:
            main(["optimize-pat", "--config", str(cfg), "--point", "0,0,0.1,1", "--out", str(tmp_path / "x")])
        assert exc.value.code == 2

    def test_missing_points_file(self, tmp_path, capsys):
        out = tmp_path / "missing"
        assert main(["optimize-pat", "--points", str(tmp_path / "nope.json"), "--out", str(out)]) == 2
        assert not out.exists()
        assert "not found" in capsys.readouterr().err

    def test_point_on_transducer_is_numerical_failure(self, tmp_path, capsys):
        code = main(["optimize-pat", "--point", "0.00525,0.00525,0,100", "--out", str(tmp_path / "x")])
        assert code == 1
        assert "transducer" in capsys.readouterr().err


class TestOptimizePlate:
    def test_chart_both_solvers(self, tmp_path):
        reports = {}
        for solver in ("diffpat", "iasa"):
            out = tmp_path / solver
            assert main(["optimize-plate", "--chart", "64", "--solver", solver, "--iters", "50",
                         "--out", str(out)]) == 0
            reports[solver] = json.loads((out / "report.json").read_text())
            phase, dx, _ = read_grid(out / "phase")
            assert phase.shape == (64, 64) and dx == 150e-6
            assert np.all(np.abs(phase.real) <= np.pi) and not phase.imag.any()
            amp, _, _ = read_grid(out / "amplitude")
            assert amp.shape == (64, 64)
        assert reports["diffpat"]["psnr_db"] > reports["iasa"]["psnr_db"]

    def test_black_target(self, tmp_path, capsys):
        write_pgm(tmp_path / "black.pgm", np.zeros((16, 16)))
        assert main(["optimize-plate", "--target", str(tmp_path / "black.pgm"), "--out", str(tmp_path / "o")]) == 2
        assert "target has zero peak" in capsys.readouterr().err

    def test_non_square(self, tmp_path):
        write_pgm(tmp_path / "r.pgm", np.ones((16, 8)))
        assert main(["optimize-plate", "--target", str(tmp_path / "r.pgm"), "--out", str(tmp_path / "o")]) == 2

    def test_not_p5(self, tmp_path):
        (tmp_path / "a.pgm").write_bytes(b"P2\n2 2\n255\n0 255 0 0\n")
        assert main(["optimize-plate", "--target", str(tmp_path / "a.pgm"), "--out", str(tmp_path / "o")]) == 2

    def test_rms_scaling(self, tmp_path):
        out = tmp_path / "r"
        assert main(["optimize-plate", "--chart", "64", "--iters", "2", "--target-scale", "rms",
                     "--out", str(out)]) == 0
        assert json.loads((out / "report.json").read_text())["target_peak_pa"] != 1.0


class TestBench:
    def test_results(self, tmp_path):
        out = tmp_path / "b"
        assert main(["bench", "--cells", "N=2:M=196", "--geometries", "5", "--seed", "1",
                     "--solvers", "diffpat,focal-single", "--checkpoints", "0,150", "--out", str(out)]) == 0
        with open(out / "results.csv") as fh:
            rows = list(csv.reader(fh))
        assert len(rows) == 1 + 5 * 2 * 2
        for name in ("timing.csv", "boxstats.csv", "convergence.csv", "config.json",
                     "dataset_single-sided-14_N2.jsonl", "dataset_single-sided-14_N2.meta.json"):
            assert (out / name).exists()

    def test_bad_cell(self, tmp_path):
        assert main(["bench", "--cells", "N=2:M=7", "--out", str(tmp_path / "b")]) == 2

    def test_empty_solvers(self, tmp_path):
        out = tmp_path / "e"
        assert main(["bench", "--cells", "N=2:M=196", "--geometries", "2", "--solvers", "",
                     "--out", str(out)]) == 0
        assert (out / "results.csv").read_text().count("\n") == 1


class TestPropagate:
    def run(self, tmp_path, values, *extra):
        write_grid(tmp_path / "in", values, 150e-6)
        assert main(["propagate", "--input", str(tmp_path / "in.bin"), "--out", str(tmp_path / "out"),
                     *extra]) == 0
        return read_grid(tmp_path / "out")[0]

    def test_zero_distance(self, tmp_path, rng):
        u = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
        np.testing.assert_allclose(self.run(tmp_path, u, "--distance", "0"), u, atol=1e-12)

    def test_uniform_field(self, tmp_path):
        out = self.run(tmp_path, np.ones((16, 16)), "--distance", "0.02", "--pad-factor", "1")
        np.testing.assert_allclose(out, np.exp(1j * K * 0.02), atol=1e-12)

    def test_round_trip(self, tmp_path, rng):
        # keep only propagating spatial frequencies
        spec = np.fft.fft2(rng.normal(size=(32, 32)) + 1j * rng.normal(size=(32, 32)))
        kx = 2 * np.pi * np.fft.fftfreq(32, 150e-6)
        spec[kx[:, None] ** 2 + kx[None, :] ** 2 > (0.9 * K) ** 2] = 0
        u = np.fft.ifft2(spec)
        write_grid(tmp_path / "u", u, 150e-6)
        common = ["--distance", "0.02", "--pad-factor", "1"]
        assert main(["propagate", "--input", str(tmp_path / "u"), "--out", str(tmp_path / "f"), *common]) == 0
        assert main(["propagate", "--input", str(tmp_path / "f"), "--out", str(tmp_path / "r"),
                     "--adjoint", *common]) == 0
        back = read_grid(tmp_path / "r")[0]
        assert np.linalg.norm(back - u) <= 1e-6 * np.linalg.norm(u)

    def test_malformed_grid(self, tmp_path):
        (tmp_path / "bad.bin").write_bytes(b"\0" * 10)
        (tmp_path / "bad.json").write_text(json.dumps({"nx": 4, "ny": 4, "dx_m": 1e-4, "kind": "complex128"}))
        assert main(["propagate", "--input", str(tmp_path / "bad"), "--distance", "0.01",
                     "--out", str(tmp_path / "o")]) == 2


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "phaseholo.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "0.1.0" in res.stdout
