"""Complex pressure of a piston-source transducer array.

Each transducer contributes ``p_ref / d * D(theta) * exp(j (k d + phi))`` at
distance ``d``, where ``D`` is the far-field directivity of a circular piston.
Contributions are coherent, so the array field is linear in ``exp(j phi)`` and
factorises as ``G @ exp(j phi)`` with a propagation matrix ``G``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import j1 as _j1

from ._backend import kernels
from .geometry import ArrayLayout, Roi, Transducer, roi_vertices

#: Airborne defaults: 40 kHz in air at 346 m/s.
AIR_FREQUENCY = 40e3
AIR_SPEED_OF_SOUND = 346.0


@dataclass(frozen=True)
class MediumConfig:
    frequency: float = AIR_FREQUENCY
    speed_of_sound: float = AIR_SPEED_OF_SOUND

    def __post_init__(self):
        if not (self.frequency > 0 and self.speed_of_sound > 0):
            raise ValueError("frequency and speed of sound must be positive")

    @property
    def k(self) -> float:
        return 2 * np.pi * self.frequency / self.speed_of_sound

    @property
    def wavelength(self) -> float:
        return self.speed_of_sound / self.frequency


AIR = MediumConfig()


def bessel_j1(x):
    """Bessel function of the first kind, order 1."""
    return _j1(x)


def directivity(k, r, theta):
    """Piston directivity ``2 J1(u)/u`` with ``u = k r sin(theta)``.

    The sign is kept: beyond the first zero of J1 the lobe is phase inverted.
    Returns exactly 1 on axis.
    """
    if not (k > 0 and r > 0):
        raise ValueError("k and r must be positive")
    u = np.asarray(k * r * np.sin(theta), dtype=np.float64)
    out = kernels.piston_directivity(np.ascontiguousarray(u.reshape(-1)))
    return out.reshape(u.shape) if u.ndim else float(out[0])


def _as_points(points) -> np.ndarray:
    return np.ascontiguousarray(points, dtype=np.float64).reshape(-1, 3)


def element_pressure(t: Transducer, x, phase: float, medium: MediumConfig = AIR) -> complex:
    """Complex pressure at ``x`` from one transducer driven with ``phase``."""
    v = np.asarray(x, dtype=np.float64) - t.position
    d = float(np.linalg.norm(v))
    if d == 0.0:
        raise ValueError("point coincides with the transducer position")
    s = min(np.linalg.norm(np.cross(t.normal, v)) / d, 1.0)
    k = medium.k
    D = float(kernels.piston_directivity(np.array([k * t.radius * s]))[0])
    return t.p_ref / d * D * np.exp(1j * (k * d + phase))


def propagation_matrix(layout: ArrayLayout, points, medium: MediumConfig = AIR) -> np.ndarray:
    """``(C, M)`` complex matrix with ``G[c, m]`` = pressure at point c from transducer m at phase 0."""
    pts = _as_points(points)
    return kernels.propagation_matrix(layout.positions, layout.normals, layout.radii,
                                      layout.p_ref, pts, medium.k)


def total_pressure(layout: ArrayLayout, phases, points, medium: MediumConfig = AIR) -> np.ndarray:
    """Coherent sum of all element pressures at each of ``points``."""
    phases = np.asarray(phases, dtype=np.float64).reshape(-1)
    if phases.shape[0] != len(layout):
        raise ValueError(f"expected {len(layout)} phases, got {phases.shape[0]}")
    G = propagation_matrix(layout, points, medium)
    return G @ np.exp(1j * phases)


def focal_phases(layout: ArrayLayout, focus, medium: MediumConfig = AIR) -> np.ndarray:
    """Single-focus hologram: cancel each element's propagation delay to ``focus``.

    Phases are referenced to the distance from the origin to the focus, so every
    element arrives with phase ``k * |focus|``.
    """
    focus = np.asarray(focus, dtype=np.float64).reshape(3)
    d = np.linalg.norm(layout.positions - focus, axis=1)
    if np.any(d == 0.0):
        raise ValueError(f"focus coincides with transducer {int(np.argmin(d))}")
    return -medium.k * (d - np.linalg.norm(focus))


def focal_amplitude(layout: ArrayLayout, focus, medium: MediumConfig = AIR) -> float:
    """Pressure amplitude at ``focus`` when the array is driven with ``focal_phases``."""
    phi = focal_phases(layout, focus, medium)
    return float(np.abs(total_pressure(layout, phi, focus, medium)[0]))


def calibrate_total_amplitude(layout: ArrayLayout, roi: Roi, medium: MediumConfig = AIR) -> float:
    """Mean single-focus amplitude over the 8 ROI corners (the achievable-pressure budget)."""
    return float(np.mean([focal_amplitude(layout, v, medium) for v in roi_vertices(roi)]))


def field_slice(layout: ArrayLayout, phases, z: float, half_width: float, n: int,
                medium: MediumConfig = AIR) -> tuple[np.ndarray, float]:
    """Complex pressure on an ``n x n`` grid in the plane ``z`` spanning ``[-half_width, half_width]``.

    Returns the field, indexed ``[ix, iy]``, and the grid spacing.
    """
    g = np.linspace(-half_width, half_width, n)
    xx, yy = np.meshgrid(g, g, indexing="ij")
    pts = np.column_stack([xx.ravel(), yy.ravel(), np.full(n * n, float(z))])
    p = total_pressure(layout, phases, pts, medium)
    return p.reshape(n, n), float(g[1] - g[0]) if n > 1 else 0.0
