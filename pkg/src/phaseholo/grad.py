"""Loss functions and their exact phase gradients.

Two objectives are supported:

* transducer arrays: squared amplitude error at the control points,
  ``L = sum_c (A_c - |p_c|)^2`` with ``p = G @ exp(j phi)``;
* phase plates: absolute amplitude error over an image plane,
  ``L = sum_xy |A(x, y) - |p(x, y)||`` with ``p`` the angular spectrum
  propagation of ``source * exp(j phi)``.

Both losses are real functions of complex fields, so gradients are taken with
respect to the real phases. Writing ``u = p / |p|``,

    dL/dphi_m = sum_c 2 (A_c - |p_c|) Im(conj(u_c) G_cm exp(j phi_m))

for arrays, and for plates, with ``s = sign(|p| - A)`` and
``b = P^H (s u)`` (``P^H`` the adjoint propagator),

    dL/dphi = Im(source * exp(-j phi) * b).

Where ``|p|`` vanishes (or sits on the L1 kink) the contribution is set to zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .asm import AngularSpectrum, AsmOptions

#: Magnitudes below this are treated as zero when forming unit phasors.
TINY = 1e-12
#: Default plate pixel pitch (m).
PLATE_DX = 150e-6


@dataclass
class PatLossReport:
    loss: float
    pressures: np.ndarray
    targets: np.ndarray
    n_singular: int = 0

    @property
    def amplitudes(self) -> np.ndarray:
        return np.abs(self.pressures)

    @property
    def rp(self) -> np.ndarray:
        return self.amplitudes / self.targets

    @property
    def per_point(self) -> list[dict]:
        return [{"amplitude": float(a), "target": float(t), "rp": float(a / t)}
                for a, t in zip(self.amplitudes, self.targets)]


def _check_pat(phases, G, targets):
    phases = np.ascontiguousarray(phases, dtype=np.float64).reshape(-1)
    G = np.ascontiguousarray(G, dtype=np.complex128)
    targets = np.ascontiguousarray(targets, dtype=np.float64).reshape(-1)
    if G.ndim != 2:
        raise ValueError("propagation matrix must be 2-D")
    if G.shape[1] != phases.shape[0]:
        raise ValueError(f"matrix has {G.shape[1]} columns but {phases.shape[0]} phases given")
    if G.shape[0] != targets.shape[0]:
        raise ValueError(f"matrix has {G.shape[0]} rows but {targets.shape[0]} targets given")
    if np.any(targets <= 0):
        raise ValueError("targets must be positive")
    return phases, G, targets


def pat_loss_and_gradient(phases, G, targets) -> tuple[PatLossReport, np.ndarray]:
    """Loss report and gradient in one pass (the optimiser's hot path)."""
    phases, G, targets = _check_pat(phases, G, targets)
    loss, grad, p, n_sing = kernels.pat_loss_grad(G, phases, targets, TINY)
    return PatLossReport(float(loss), p, targets, n_sing), grad


def pat_loss(phases, G, targets) -> PatLossReport:
    phases, G, targets = _check_pat(phases, G, targets)
    p = G @ np.exp(1j * phases)
    a = np.abs(p)
    return PatLossReport(float(np.sum((targets - a) ** 2)), p, targets,
                         int(np.count_nonzero(a < TINY)))


def pat_loss_gradient(phases, G, targets) -> np.ndarray:
    return pat_loss_and_gradient(phases, G, targets)[1]


class PlateObjective:
    """L1 amplitude objective for a phase plate, with a cached propagator.

    Parameters
    ----------
    target : (n, n) array
        Target amplitude image (Pa).
    source_amp : float or (n, n) array
        Source amplitude (Pa); an array models a finite aperture.
    distance, k, dx :
        Propagation distance (m), wavenumber (1/m) and pixel pitch (m).
    """

    def __init__(self, target, source_amp, distance, k, dx=PLATE_DX, opts: AsmOptions = AsmOptions()):
        self.target = np.asarray(target, dtype=np.float64)
        if self.target.ndim != 2:
            raise ValueError("target must be a 2-D image")
        self.source_amp = np.broadcast_to(np.asarray(source_amp, dtype=np.float64), self.target.shape)
        self.prop = AngularSpectrum(self.target.shape, dx, distance, k, opts)

    def _check(self, phase):
        phase = np.asarray(phase, dtype=np.float64)
        if phase.shape != self.target.shape:
            raise ValueError(f"plate shape {phase.shape} does not match target {self.target.shape}")
        return phase

    def field(self, phase) -> np.ndarray:
        return self.prop.forward(self.source_amp * np.exp(1j * self._check(phase)))

    def loss(self, phase) -> float:
        return float(np.sum(np.abs(self.target - np.abs(self.field(phase)))))

    def loss_and_gradient(self, phase) -> tuple[float, np.ndarray]:
        phase = self._check(phase)
        src = self.source_amp * np.exp(1j * phase)
        p = self.prop.forward(src)
        a = np.abs(p)
        diff = a - self.target
        loss = float(np.sum(np.abs(diff)))
        ok = (a >= TINY) & (np.abs(diff) >= TINY)
        s = np.where(ok, np.sign(diff), 0.0)
        back = self.prop.adjoint(s * p / np.where(ok, a, 1.0))
        grad = np.imag(np.conj(src) * back)
        return loss, grad


def plate_loss(plate_phase, target, source_amp, distance, k, opts: AsmOptions = AsmOptions(),
               dx: float = PLATE_DX) -> float:
    """``sum |target - |propagate(source * exp(j phase))||`` (not normalised by pixel count)."""
    _same_shape(plate_phase, target)
    return PlateObjective(target, source_amp, distance, k, dx, opts).loss(plate_phase)


def plate_loss_gradient(plate_phase, target, source_amp, distance, k, opts: AsmOptions = AsmOptions(),
                        dx: float = PLATE_DX) -> np.ndarray:
    _same_shape(plate_phase, target)
    return PlateObjective(target, source_amp, distance, k, dx, opts).loss_and_gradient(plate_phase)[1]


def _same_shape(a, b):
    if np.shape(a) != np.shape(b):
        raise ValueError(f"plate shape {np.shape(a)} does not match target {np.shape(b)}")
