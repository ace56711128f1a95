"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``.

Used when the extension is not built or ``PHASEHOLO_PUREPY=1`` is set. Both
implementations must agree to rounding error; ``tests/test_backend.py`` checks this.
"""

import numpy as np
from scipy.special import j1


def piston_directivity(u):
    """``2 J1(u) / u`` with a Taylor branch for ``|u| < 1e-4``."""
    u = np.asarray(u, dtype=np.float64)
    small = np.abs(u) < 1e-4
    safe = np.where(small, 1.0, u)
    u2 = u * u
    return np.where(small, 1.0 - u2 / 8.0 + u2 * u2 / 192.0, 2.0 * j1(safe) / safe)


def propagation_matrix(tpos, tnrm, radii, p_ref, points, k):
    v = points[:, None, :] - tpos[None, :, :]
    d = np.sqrt(np.sum(v * v, axis=-1))
    if np.any(d == 0.0):
        c, m = np.argwhere(d == 0.0)[0]
        raise ValueError(f"control point {c} coincides with transducer {m}")
    cr = np.cross(np.broadcast_to(tnrm[None, :, :], v.shape), v)
    s = np.minimum(np.sqrt(np.sum(cr * cr, axis=-1)) / d, 1.0)
    D = piston_directivity(k * radii[None, :] * s)
    amp = p_ref[None, :] * D / d
    return amp * np.cos(k * d) + 1j * (amp * np.sin(k * d))


def pat_loss_grad(G, phases, targets, tiny=1e-12):
    e = np.cos(phases) + 1j * np.sin(phases)
    p = G @ e
    a = np.abs(p)
    loss = float(np.sum((targets - a) ** 2))
    sing = a < tiny
    # d|p_c|/d phi_m = -Im(conj(u_c) G_cm e_m) with u_c = p_c / |p_c|
    w = np.where(sing, 0.0, 2.0 * (targets - a) / np.where(sing, 1.0, a))
    coef = w * np.conj(p)
    grad = np.imag((coef @ G) * e)
    return loss, grad, p, int(np.count_nonzero(sing))
