"""Adam and the hologram optimisers.

``optimize_pat`` fits transducer phases to control-point amplitudes,
``optimize_plate`` fits a phase plate to a target image, and ``iasa`` is the
Gerchberg-Saxton style iterative angular spectrum baseline for plates.
Phases are optimised unwrapped; use :func:`wrap_phase` for export.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .asm import AsmOptions
from .field import AIR, MediumConfig, propagation_matrix
from .geometry import ArrayLayout, ControlPointSet
from .grad import PlateObjective, pat_loss_and_gradient


@dataclass(frozen=True)
class AdamConfig:
    alpha: float = 0.1
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("beta1 and beta2 must lie in [0, 1)")
        if not (self.alpha > 0 and self.epsilon > 0):
            raise ValueError("alpha and epsilon must be positive")


@dataclass
class AdamState:
    step: int
    m: np.ndarray
    v: np.ndarray

    @classmethod
    def zeros_like(cls, params) -> "AdamState":
        return cls(0, np.zeros_like(params, dtype=np.float64), np.zeros_like(params, dtype=np.float64))


def adam_step(state: AdamState, grad, params, cfg: AdamConfig = AdamConfig()):
    """One bias-corrected Adam update; returns ``(new_params, new_state)``."""
    grad = np.asarray(grad, dtype=np.float64)
    params = np.asarray(params, dtype=np.float64)
    if grad.shape != params.shape or state.m.shape != params.shape:
        raise ValueError(f"shape mismatch: params {params.shape}, grad {grad.shape}, state {state.m.shape}")
    bad = ~np.isfinite(grad)
    if bad.any():
        idx = np.unravel_index(int(np.argmax(bad)), grad.shape)
        raise FloatingPointError(f"non-finite gradient component at index {idx if grad.ndim > 1 else idx[0]}")
    t = state.step + 1
    m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grad
    v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * (grad * grad)
    m_hat = m / (1.0 - cfg.beta1 ** t)
    v_hat = v / (1.0 - cfg.beta2 ** t)
    new = params - cfg.alpha * m_hat / (np.sqrt(v_hat) + cfg.epsilon)
    return new, AdamState(t, m, v)


def wrap_phase(phi):
    """Map phases to (-pi, pi]."""
    w = np.angle(np.exp(1j * np.asarray(phi)))
    return np.where(w == -np.pi, np.pi, w)


@dataclass
class RunRecord:
    """Optimiser trajectory. Entry ``i`` of each history is the state after ``i`` updates."""

    loss: list = field(default_factory=list)
    rp_mean: list = field(default_factory=list)
    rp_std: list = field(default_factory=list)
    final_phases: np.ndarray | None = None
    seed: int | None = None
    wall_time_s: float = 0.0
    rp_history: np.ndarray | None = None
    solver: str = "diffpat"

    @property
    def iterations(self) -> int:
        return len(self.loss) - 1

    @property
    def final_rp(self) -> np.ndarray | None:
        return None if self.rp_history is None else self.rp_history[-1]

    def to_dict(self, include_phases: bool = True) -> dict:
        d = {
            "solver": self.solver,
            "iterations": self.iterations,
            "seed": self.seed,
            "loss": [float(x) for x in self.loss],
            "rp_mean": [float(x) for x in self.rp_mean],
            "rp_std": [float(x) for x in self.rp_std],
            "wall_time_s": self.wall_time_s,
        }
        if self.rp_history is not None:
            d["final_rp"] = [float(x) for x in self.rp_history[-1]]
        if include_phases and self.final_phases is not None:
            d["final_phases"] = wrap_phase(self.final_phases).ravel().tolist()
        return d

    def save(self, path, include_phases: bool = True):
        with open(path, "w") as fh:
            json.dump(self.to_dict(include_phases), fh, indent=1)


def random_initial_phases(seed, m: int) -> np.ndarray:
    return np.random.default_rng(seed).uniform(0.0, 2 * np.pi, size=m)


def optimize_pat(layout: ArrayLayout, geometry: ControlPointSet, medium: MediumConfig = AIR,
                 iters: int = 150, seed=None, adam: AdamConfig = AdamConfig(),
                 initial_phases=None, G=None) -> RunRecord:
    """Fit transducer phases so each control point reaches its target amplitude.

    Starts from phases uniform on [0, 2 pi) drawn from ``seed`` unless
    ``initial_phases`` is given. ``G`` may be passed to reuse a propagation matrix.
    """
    if iters < 0:
        raise ValueError("iters must be non-negative")
    targets = geometry.amplitudes
    if np.any(targets <= 0):
        raise ValueError("control point amplitudes must be positive")
    t0 = time.perf_counter()
    if G is None:
        G = propagation_matrix(layout, geometry.positions, medium)
    if initial_phases is None:
        phi = random_initial_phases(seed, len(layout))
    else:
        phi = np.array(initial_phases, dtype=np.float64).reshape(len(layout))
    state = AdamState.zeros_like(phi)
    rec = RunRecord(seed=seed)
    rp_hist = np.empty((iters + 1, len(targets)))
    for i in range(iters + 1):
        report, grad = pat_loss_and_gradient(phi, G, targets)
        rp = report.rp
        rec.loss.append(report.loss)
        rec.rp_mean.append(float(rp.mean()))
        rec.rp_std.append(float(rp.std()))
        rp_hist[i] = rp
        if i < iters:
            phi, state = adam_step(state, grad, phi, adam)
    rec.rp_history = rp_hist
    rec.final_phases = phi
    rec.wall_time_s = time.perf_counter() - t0
    return rec


@dataclass(frozen=True)
class PlateConfig:
    """Underwater phase-plate setup: 2 MHz source, 150 um pixels, image 20 mm away."""

    frequency: float = 2e6
    speed_of_sound: float = 1480.0
    dx: float = 150e-6
    distance: float = 0.02
    n: int = 256
    iters: int = 200
    source_amp: float = 1.0
    #: Circular source aperture (m); ``None`` drives the whole plate.
    aperture_diameter: float | None = 0.035
    pad_factor: int = 2
    evanescent_mode: str = "decay"
    #: Target amplitude (Pa) of a full-white pixel, or ``"rms"`` to match the free-field RMS.
    target_scale: float | str = 1.0
    adam: AdamConfig = AdamConfig()

    @property
    def k(self) -> float:
        return 2 * np.pi * self.frequency / self.speed_of_sound

    @property
    def asm_options(self) -> AsmOptions:
        return AsmOptions(self.pad_factor, self.evanescent_mode)

    def to_dict(self) -> dict:
        return asdict(self)


def source_amplitude(cfg: PlateConfig, n: int | None = None) -> np.ndarray:
    """Source amplitude map: ``source_amp`` inside the aperture, 0 outside."""
    n = cfg.n if n is None else n
    amp = np.full((n, n), float(cfg.source_amp))
    if cfg.aperture_diameter is not None:
        c = (np.arange(n) - (n - 1) / 2.0) * cfg.dx
        r2 = c[:, None] ** 2 + c[None, :] ** 2
        amp[r2 > (cfg.aperture_diameter / 2.0) ** 2] = 0.0
    return amp


def free_field_rms(cfg: PlateConfig, n: int | None = None) -> float:
    """RMS amplitude at the image plane of the unmodulated source."""
    n = cfg.n if n is None else n
    obj = PlateObjective(np.zeros((n, n)), source_amplitude(cfg, n), cfg.distance, cfg.k, cfg.dx,
                         cfg.asm_options)
    return float(np.sqrt(np.mean(np.abs(obj.field(np.zeros((n, n)))) ** 2)))


def scale_target(image, cfg: PlateConfig, scale: float | str | None = None) -> np.ndarray:
    """Map an image to target amplitudes (Pa).

    The image is normalised to a peak of 1 and multiplied by ``scale``
    (``cfg.target_scale`` when omitted). ``"rms"`` picks the scale that makes the
    target's RMS equal to the free-field RMS at the image plane.
    """
    img = np.asarray(image, dtype=np.float64)
    peak = img.max()
    if not peak > 0:
        raise ValueError("target has zero peak")
    img = img / peak
    scale = cfg.target_scale if scale is None else scale
    if scale == "rms":
        scale = free_field_rms(cfg, img.shape[0]) / float(np.sqrt(np.mean(img ** 2)))
    elif not float(scale) > 0:
        raise ValueError("target scale must be positive")
    return img * float(scale)


def _plate_objective(target, cfg: PlateConfig) -> PlateObjective:
    target = np.asarray(target, dtype=np.float64)
    if target.ndim != 2 or target.shape[0] != target.shape[1]:
        raise ValueError(f"target must be square, got shape {target.shape}")
    return PlateObjective(target, source_amplitude(cfg, target.shape[0]), cfg.distance, cfg.k,
                          cfg.dx, cfg.asm_options)


def optimize_plate(target, cfg: PlateConfig = PlateConfig(), iters: int | None = None, seed=None,
                   initial_phase=None) -> tuple[RunRecord, np.ndarray]:
    """Adam on the L1 plate loss from an all-zero phase. ``seed`` is recorded only."""
    iters = cfg.iters if iters is None else iters
    t0 = time.perf_counter()
    obj = _plate_objective(target, cfg)
    phi = np.zeros(obj.target.shape) if initial_phase is None else np.array(initial_phase, dtype=np.float64)
    state = AdamState.zeros_like(phi)
    rec = RunRecord(seed=seed, solver="diffpat")
    for i in range(iters + 1):
        loss, grad = obj.loss_and_gradient(phi)
        rec.loss.append(loss)
        if i < iters:
            phi, state = adam_step(state, grad, phi, cfg.adam)
    rec.final_phases = phi
    rec.wall_time_s = time.perf_counter() - t0
    return rec, phi


def iasa(target, cfg: PlateConfig = PlateConfig(), iters: int | None = None,
         initial_phase=None) -> tuple[np.ndarray, RunRecord]:
    """Iterative angular spectrum approach.

    Each iteration propagates the source to the image plane, imposes the target
    amplitude while keeping the phase, back-propagates with the adjoint and keeps
    only the phase of the result. ``record.loss[i]`` is the L1 image error of the
    phase held after ``i`` iterations.
    """
    iters = cfg.iters if iters is None else iters
    t0 = time.perf_counter()
    obj = _plate_objective(target, cfg)
    A = obj.target
    src_amp = obj.source_amp
    phi = np.zeros(A.shape) if initial_phase is None else np.array(initial_phase, dtype=np.float64)
    rec = RunRecord(solver="iasa")
    for i in range(iters + 1):
        p = obj.prop.forward(src_amp * np.exp(1j * phi))
        rec.loss.append(float(np.sum(np.abs(A - np.abs(p)))))
        if i == iters:
            break
        back = obj.prop.adjoint(A * np.exp(1j * np.angle(p)))
        # pixels outside the aperture carry no source; keep their phase
        phi = np.where(src_amp > 0, np.angle(back), phi)
    rec.final_phases = phi
    rec.wall_time_s = time.perf_counter() - t0
    return phi, rec


def reconstruct(phase, cfg: PlateConfig = PlateConfig()) -> np.ndarray:
    """Amplitude image produced at the image plane by ``phase``."""
    phase = np.asarray(phase, dtype=np.float64)
    obj = PlateObjective(np.zeros(phase.shape), source_amplitude(cfg, phase.shape[0]), cfg.distance,
                         cfg.k, cfg.dx, cfg.asm_options)
    return np.abs(obj.field(phase))
