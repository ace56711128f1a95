"""Continuous-wave angular spectrum propagation between parallel planes.

The field is zero padded by ``pad_factor``, transformed with an FFT, multiplied by
the transfer function ``H = exp(j kz d)`` and transformed back, then cropped to the
input size (the input occupies the leading ``nx x ny`` corner of the padded grid).

Spatial frequencies follow ``numpy.fft.fftfreq`` ordering:
``kx[m] = 2 pi m / (N dx)`` for ``m = 0 .. N/2-1`` followed by the negative
frequencies ``-N/2 .. -1``. Components with ``kx^2 + ky^2 > k^2`` are evanescent;
they decay as ``exp(-sqrt(kx^2 + ky^2 - k^2) d)`` in ``"decay"`` mode or are
removed in ``"zero"`` mode.

The adjoint applies ``conj(H)`` through the same pad/crop pipeline, which is the
exact adjoint of the forward operator for the inner product ``sum(conj(u) * v)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PAD_FACTORS = (1, 2, 4)
EVANESCENT_MODES = ("decay", "zero")


@dataclass(frozen=True)
class AsmOptions:
    pad_factor: int = 2
    evanescent_mode: str = "decay"
    direction: str = "forward"

    def __post_init__(self):
        if self.pad_factor not in PAD_FACTORS:
            raise ValueError(f"pad_factor must be one of {PAD_FACTORS}")
        if self.evanescent_mode not in EVANESCENT_MODES:
            raise ValueError(f"evanescent_mode must be one of {EVANESCENT_MODES}")
        if self.direction not in ("forward", "adjoint"):
            raise ValueError("direction must be 'forward' or 'adjoint'")


@dataclass
class ComplexPlane:
    """Complex field sampled on a uniform grid; ``values[ix, iy]``."""

    values: np.ndarray
    dx: float

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.ndim != 2 or min(self.values.shape) < 2:
            raise ValueError("plane must be a 2-D grid of at least 2x2 samples")
        if not self.dx > 0:
            raise ValueError("sample spacing must be positive")

    @property
    def nx(self) -> int:
        return self.values.shape[0]

    @property
    def ny(self) -> int:
        return self.values.shape[1]


def wavenumbers(n: int, dx: float) -> np.ndarray:
    return 2 * np.pi * np.fft.fftfreq(n, d=dx)


def transfer_function(shape, dx: float, distance: float, k: float,
                      evanescent_mode: str = "decay", conjugate: bool = False) -> np.ndarray:
    """Angular spectrum transfer function on a grid of ``shape`` (already padded)."""
    kx = wavenumbers(shape[0], dx)[:, None]
    ky = wavenumbers(shape[1], dx)[None, :]
    kr2 = kx * kx + ky * ky
    prop = kr2 <= k * k
    kz = np.sqrt(np.where(prop, k * k - kr2, 0.0))
    if evanescent_mode == "decay":
        kappa = np.sqrt(np.where(prop, 0.0, kr2 - k * k))
        H = np.where(prop, np.exp(1j * kz * distance), np.exp(-kappa * distance))
    elif evanescent_mode == "zero":
        H = np.where(prop, np.exp(1j * kz * distance), 0.0)
    else:
        raise ValueError(f"unknown evanescent mode {evanescent_mode!r}")
    return np.conj(H) if conjugate else H


class AngularSpectrum:
    """Cached forward/adjoint propagator for a fixed grid, distance and wavenumber.

    Holds the transfer function; instances are not shared across threads.
    """

    def __init__(self, shape, dx: float, distance: float, k: float, opts: AsmOptions = AsmOptions()):
        if distance < 0:
            raise ValueError("distance must be non-negative")
        if not (dx > 0 and k > 0):
            raise ValueError("dx and k must be positive")
        self.shape = tuple(int(s) for s in shape)
        self.dx = float(dx)
        self.distance = float(distance)
        self.k = float(k)
        self.opts = opts
        self.padded = tuple(s * opts.pad_factor for s in self.shape)
        self.H = transfer_function(self.padded, dx, distance, k, opts.evanescent_mode)
        self.H_adj = np.conj(self.H)

    def _apply(self, u, H):
        u = np.asarray(u)
        if u.shape != self.shape:
            raise ValueError(f"expected field of shape {self.shape}, got {u.shape}")
        if not np.all(np.isfinite(u)):
            raise ValueError("input field contains non-finite values")
        spec = np.fft.fft2(u, s=self.padded)
        out = np.fft.ifft2(spec * H)
        return out[: self.shape[0], : self.shape[1]]

    def forward(self, u) -> np.ndarray:
        return self._apply(u, self.H)

    def adjoint(self, v) -> np.ndarray:
        return self._apply(v, self.H_adj)


def _run(plane: ComplexPlane, distance, k, opts, adjoint):
    if not np.all(np.isfinite(plane.values)):
        raise ValueError("input field contains non-finite values")
    prop = AngularSpectrum(plane.values.shape, plane.dx, distance, k, opts)
    out = prop.adjoint(plane.values) if adjoint else prop.forward(plane.values)
    return ComplexPlane(out, plane.dx)


def propagate_cw(plane: ComplexPlane, distance: float, k: float,
                 opts: AsmOptions = AsmOptions()) -> ComplexPlane:
    """Propagate ``plane`` by ``distance``; ``opts.direction == "adjoint"`` applies the adjoint instead."""
    return _run(plane, distance, k, opts, adjoint=opts.direction == "adjoint")


def adjoint_propagate_cw(plane: ComplexPlane, distance: float, k: float,
                         opts: AsmOptions = AsmOptions()) -> ComplexPlane:
    return _run(plane, distance, k, opts, adjoint=True)
