import numpy as np
import pytest

from conftest import random_layout, random_points
from oracles import first_j1_zero, j1_series
from phaseholo.field import (AIR, MediumConfig, bessel_j1, calibrate_total_amplitude, directivity,
                             element_pressure, field_slice, focal_amplitude, focal_phases,
                             propagation_matrix, total_pressure)
from phaseholo.geometry import ArrayLayout, Roi, Transducer, build_single_sided

class TestBessel:
    def test_known_value(self):
        assert bessel_j1(1.0) == pytest.approx(0.4400505857449335, abs=1e-15)
        assert j1_series(1.0) == pytest.approx(0.4400505857449335, abs=1e-15)

    def test_first_zero(self):
        z = first_j1_zero()
        assert z == pytest.approx(3.8317059702075125, abs=1e-12)
        assert abs(bessel_j1(z)) < 1e-12

    def test_against_series(self):
        xs = np.concatenate([np.linspace(-50, 50, 401), [1e-8, 1e-3, 0.5, 7.0155866698156]])
        ref = np.array([j1_series(x) for x in xs])
        np.testing.assert_allclose(bessel_j1(xs), ref, rtol=0, atol=1e-10)

    def test_odd(self):
        xs = np.linspace(0, 30, 97)
        np.testing.assert_array_equal(bessel_j1(-xs), -bessel_j1(xs))


class TestDirectivity:
    def test_on_axis_is_one(self, kernels):
        assert directivity(AIR.k, 0.005, 0.0) == 1.0

    def test_small_argument_limit(self, kernels):
        for u in (1e-9, 1e-6, 5e-5, 2e-4):
            th = np.arcsin(u / (AIR.k * 0.005))
            assert directivity(AIR.k, 0.005, th) == pytest.approx(2 * j1_series(u) / u, rel=1e-14)

    def test_matches_oracle(self, kernels):
        k, r = AIR.k, 0.005
        th = np.linspace(-np.pi / 2, np.pi / 2, 181)
        u = k * r * np.sin(th)
        ref = np.array([2 * j1_series(x) / x if x != 0 else 1.0 for x in u])
        np.testing.assert_allclose(directivity(k, r, th), ref, atol=1e-12)

    def test_first_null(self, kernels):
        k, r = AIR.k, 0.008
        th = np.arcsin(first_j1_zero() / (k * r))
        assert abs(directivity(k, r, th)) < 1e-12

    def test_sign_kept_in_side_lobe(self, kernels):
        k = AIR.k
        assert directivity(k, 5.0 / k, np.pi / 2) < 0

    def test_bad_inputs(self):
        with pytest.raises(ValueError):
            directivity(0.0, 0.005, 0.1)
        with pytest.raises(ValueError):
            directivity(AIR.k, -1.0, 0.1)


class TestElementPressure:
    def test_on_axis(self, kernels):
        t = Transducer([0, 0, 0], [0, 0, 1])
        p = element_pressure(t, [0, 0, 0.1], 0.0)
        assert abs(p) == pytest.approx(19.8, rel=1e-12)
        assert np.angle(p) == pytest.approx(np.angle(np.exp(1j * AIR.k * 0.1)), abs=1e-12)

    def test_phase_shift(self, kernels):
        t = Transducer([0.01, -0.02, 0], [0, 0, 1])
        x = [0.03, 0.01, 0.12]
        p0 = element_pressure(t, x, 0.0)
        np.testing.assert_allclose(element_pressure(t, x, 0.7), p0 * np.exp(0.7j), rtol=1e-14)

    def test_rotation_invariance(self, kernels):
        t = Transducer([0, 0, 0], [0, 0, 1])
        tr = Transducer([0, 0, 0], [1, 0, 0])
        p = element_pressure(t, [0.02, 0.01, 0.1], 0.0)
        assert element_pressure(tr, [0.1, -0.01, 0.02], 0.0) == pytest.approx(p, rel=1e-12)

    def test_coincident_point(self):
        with pytest.raises(ValueError, match="coincides"):
            element_pressure(Transducer([0, 0, 0], [0, 0, 1]), [0, 0, 0], 0.0)


class TestPropagationMatrix:
    def test_matches_direct_sum(self, kernels, rng):
        layout = random_layout(rng, 12)
        pts = random_points(rng, 5)
        G = propagation_matrix(layout, pts)
        ref = np.array([[element_pressure(t, x, 0.0) for t in layout] for x in pts])
        np.testing.assert_allclose(G, ref, rtol=1e-12)

    def test_total_pressure_superposition(self, kernels, rng):
        layout = random_layout(rng, 9)
        pts = random_points(rng, 4)
        phi = rng.uniform(0, 2 * np.pi, 9)
        ref = np.array([sum(element_pressure(t, x, f) for t, f in zip(layout, phi)) for x in pts])
        np.testing.assert_allclose(total_pressure(layout, phi, pts), ref, rtol=1e-12)

    def test_coincident_point_named(self, kernels):
        layout = build_single_sided(2, 2, 0.01, 0)
        with pytest.raises(ValueError, match="transducer 3"):
            propagation_matrix(layout, [[0.0, 0.0, 0.1], list(layout.positions[3])])

    def test_phase_count_checked(self):
        with pytest.raises(ValueError):
            total_pressure(build_single_sided(2, 2, 0.01, 0), np.zeros(3), [[0, 0, 0.1]])


class TestFocus:
    def test_focal_phases_are_coherent(self, kernels, rng):
        layout = build_single_sided(14, 14, 0.0105, 0)
        x = [0.01, -0.02, 0.09]
        G = propagation_matrix(layout, x)[0]
        contrib = G * np.exp(1j * focal_phases(layout, x))
        # each term arrives with the same phase (directivity is positive in the main lobe)
        np.testing.assert_allclose(np.angle(contrib * np.exp(-1j * np.angle(contrib[0]))), 0, atol=1e-9)
        assert focal_amplitude(layout, x) == pytest.approx(np.abs(G).sum(), rel=1e-12)

    def test_focal_is_the_best_single_point_hologram(self, kernels, rng):
        layout = build_single_sided(6, 6, 0.0105, 0)
        x = [0.0, 0.01, 0.08]
        best = focal_amplitude(layout, x)
        for _ in range(20):
            phi = focal_phases(layout, x) + rng.normal(0, 0.3, len(layout))
            assert abs(total_pressure(layout, phi, x)[0]) <= best

    def test_calibration_single_element(self):
        layout = ArrayLayout([[0, 0, 0]], [[0, 0, 1]], radii=0.005, p_ref=1.98)
        roi = Roi((0, 0, 0.1), (1e-9, 1e-9, 1e-9))
        assert calibrate_total_amplitude(layout, roi) == pytest.approx(19.8, rel=1e-6)

    def test_calibration_is_vertex_mean(self, kernels):
        layout = build_single_sided(4, 4, 0.0105, 0)
        roi = Roi((0, 0, 0.1), (0.02, 0.03, 0.04))
        corners = [(sx * 0.02, sy * 0.03, 0.1 + sz * 0.04)
                   for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)]
        ref = np.mean([focal_amplitude(layout, c) for c in corners])
        assert calibrate_total_amplitude(layout, roi) == pytest.approx(ref, rel=1e-14)


def test_field_slice_axes():
    layout = build_single_sided(4, 4, 0.0105, 0)
    phi = focal_phases(layout, [0.02, 0.0, 0.1])
    p, dx = field_slice(layout, phi, 0.1, 0.04, 41)
    assert dx == pytest.approx(0.002)
    ix, iy = np.unravel_index(np.argmax(np.abs(p)), p.shape)
    # focus sits at x index 30; directivity pulls the peak at most one sample inward
    assert iy == 20 and ix in (29, 30)


def test_medium_validation():
    with pytest.raises(ValueError):
        MediumConfig(frequency=0)
    assert MediumConfig(40e3, 346.0).wavelength == pytest.approx(346 / 40e3)
