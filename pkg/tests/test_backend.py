import os
import subprocess
import sys

import numpy as np
import pytest

from conftest import random_layout, random_points
from phaseholo import _backend

try:
    CY = _backend.get("cython")
except ImportError:
    CY = None
NP = _backend.get("numpy")

needs_cython = pytest.mark.skipif(CY is None, reason="compiled kernels not built")


@needs_cython
class TestAgreement:
    def test_directivity(self):
        u = np.concatenate([np.linspace(-40, 40, 1001), [0.0, 1e-5, -1e-5, 1e-4, 1.00001e-4]])
        np.testing.assert_allclose(CY.piston_directivity(u), NP.piston_directivity(u), rtol=1e-13, atol=1e-15)

    def test_propagation_matrix(self, rng):
        lay = random_layout(rng, 40)
        pts = random_points(rng, 9)
        a = CY.propagation_matrix(lay.positions, lay.normals, lay.radii, lay.p_ref, pts, 726.0)
        b = NP.propagation_matrix(lay.positions, lay.normals, lay.radii, lay.p_ref, pts, 726.0)
        np.testing.assert_allclose(a, b, rtol=1e-12)

    def test_loss_and_gradient(self, rng):
        G = rng.normal(size=(7, 50)) + 1j * rng.normal(size=(7, 50))
        phi = rng.uniform(0, 6, 50)
        A = rng.uniform(1, 10, 7)
        ca, na = CY.pat_loss_grad(G, phi, A, 1e-12), NP.pat_loss_grad(G, phi, A, 1e-12)
        assert ca[0] == pytest.approx(na[0], rel=1e-13)
        np.testing.assert_allclose(ca[1], na[1], rtol=1e-10, atol=1e-12 * np.abs(na[1]).max())
        np.testing.assert_allclose(ca[2], na[2], rtol=1e-13)
        assert ca[3] == na[3] == 0

    def test_no_control_points(self):
        for mod in (CY, NP):
            loss, grad, p, n = mod.pat_loss_grad(np.zeros((0, 3), complex), np.zeros(3), np.zeros(0))
            assert loss == 0.0 and n == 0 and p.size == 0
            np.testing.assert_array_equal(grad, 0.0)

    def test_coincident_error(self):
        pos = np.zeros((1, 3))
        nrm = np.array([[0.0, 0.0, 1.0]])
        for mod in (CY, NP):
            with pytest.raises(ValueError, match="transducer 0"):
                mod.propagation_matrix(pos, nrm, np.array([0.005]), np.array([1.98]), np.zeros((1, 3)), 726.0)


def test_env_var_forces_fallback():
    env = dict(os.environ, PHASEHOLO_PUREPY="1")
    res = subprocess.run([sys.executable, "-c", "import phaseholo._backend as b; print(b.BACKEND)"],
                         capture_output=True, text=True, env=env)
    assert res.stdout.strip() == "numpy"


def test_unknown_backend():
    with pytest.raises(ValueError):
        _backend.get("fortran")
