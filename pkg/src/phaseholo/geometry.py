"""Transducer array layouts, regions of interest and random control-point sets.

Arrays are planar square grids of circular piston transducers. Two layouts are
provided: a single panel facing +z, and a pair of facing panels (single-axis
levitator). Random control-point geometries follow the benchmark protocol: i.i.d.
uniform positions in a box-shaped ROI, amplitudes that sum to a fixed budget with
a per-point floor.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

#: Default element pitch (m). Reproduces the published vertex pressures for all three arrays.
DEFAULT_PITCH = 0.0105
#: Piston radius (m) of a 10 mm transducer.
DEFAULT_RADIUS = 0.005
#: Pressure amplitude at 1 m (Pa m) for 12 V peak-to-peak drive.
DEFAULT_P_REF = 1.98
#: Minimum amplitude assigned to any random control point (Pa).
MIN_AMPLITUDE = 10.0
#: Facing-panel separation of the single-axis array (m).
SINGLE_AXIS_SEPARATION = 0.2355


@dataclass(frozen=True)
class Transducer:
    position: np.ndarray
    normal: np.ndarray
    radius: float = DEFAULT_RADIUS
    p_ref: float = DEFAULT_P_REF

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=np.float64).reshape(3)
        nrm = np.asarray(self.normal, dtype=np.float64).reshape(3)
        if abs(np.linalg.norm(nrm) - 1.0) > 1e-12:
            raise ValueError(f"transducer normal must be a unit vector, got {nrm}")
        if not self.radius > 0:
            raise ValueError("transducer radius must be positive")
        if not self.p_ref > 0:
            raise ValueError("p_ref must be positive")
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "normal", nrm)


class ArrayLayout:
    """An ordered collection of transducers stored as flat arrays.

    Parameters
    ----------
    positions : (M, 3) array
    normals : (M, 3) array of unit vectors
    radii, p_ref : scalar or (M,) array
    label : str
    """

    def __init__(self, positions, normals, radii=DEFAULT_RADIUS, p_ref=DEFAULT_P_REF,
                 label: str = "", seed_info: dict | None = None):
        pos = np.ascontiguousarray(positions, dtype=np.float64).reshape(-1, 3)
        nrm = np.ascontiguousarray(normals, dtype=np.float64).reshape(-1, 3)
        m = pos.shape[0]
        if nrm.shape[0] != m:
            raise ValueError("positions and normals must have the same length")
        if m == 0:
            raise ValueError("layout must contain at least one transducer")
        if np.any(np.abs(np.linalg.norm(nrm, axis=1) - 1.0) > 1e-12):
            raise ValueError("all normals must be unit vectors")
        radii = np.broadcast_to(np.asarray(radii, dtype=np.float64), (m,)).copy()
        p_ref = np.broadcast_to(np.asarray(p_ref, dtype=np.float64), (m,)).copy()
        if np.any(radii <= 0) or np.any(p_ref <= 0):
            raise ValueError("radii and p_ref must be positive")
        if len(np.unique(pos, axis=0)) != m:
            raise ValueError("two transducers share a position")
        self.positions = pos
        self.normals = nrm
        self.radii = radii
        self.p_ref = p_ref
        self.label = label
        self.seed_info = seed_info or {}

    def __len__(self):
        return self.positions.shape[0]

    @property
    def M(self) -> int:
        return len(self)

    def __getitem__(self, i) -> Transducer:
        return Transducer(self.positions[i], self.normals[i], float(self.radii[i]), float(self.p_ref[i]))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def __repr__(self):
        return f"ArrayLayout(label={self.label!r}, M={len(self)})"

    @classmethod
    def from_transducers(cls, transducers, label=""):
        ts = list(transducers)
        return cls([t.position for t in ts], [t.normal for t in ts],
                   [t.radius for t in ts], [t.p_ref for t in ts], label=label)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "transducers": [
                {"pos": p.tolist(), "normal": n.tolist(), "radius": float(r), "p_ref": float(a)}
                for p, n, r, a in zip(self.positions, self.normals, self.radii, self.p_ref)
            ],
            "seed_info": self.seed_info,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ArrayLayout":
        ts = d["transducers"]
        return cls([t["pos"] for t in ts], [t["normal"] for t in ts],
                   [t.get("radius", DEFAULT_RADIUS) for t in ts],
                   [t.get("p_ref", DEFAULT_P_REF) for t in ts],
                   label=d.get("label", ""), seed_info=d.get("seed_info"))

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    @classmethod
    def load(cls, path) -> "ArrayLayout":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class Roi:
    center: tuple
    half_extent: tuple

    def __post_init__(self):
        c = tuple(float(v) for v in np.asarray(self.center).reshape(3))
        h = tuple(float(v) for v in np.asarray(self.half_extent).reshape(3))
        if min(h) <= 0:
            raise ValueError("ROI half extent must be positive along every axis")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "half_extent", h)

    @property
    def lower(self) -> np.ndarray:
        return np.subtract(self.center, self.half_extent)

    @property
    def upper(self) -> np.ndarray:
        return np.add(self.center, self.half_extent)

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x)
        return np.all((x >= self.lower) & (x <= self.upper), axis=-1)


@dataclass
class ControlPointSet:
    positions: np.ndarray
    amplitudes: np.ndarray
    id: int | str | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.positions = np.ascontiguousarray(self.positions, dtype=np.float64).reshape(-1, 3)
        self.amplitudes = np.ascontiguousarray(self.amplitudes, dtype=np.float64).reshape(-1)
        if self.positions.shape[0] != self.amplitudes.shape[0]:
            raise ValueError("positions and amplitudes must have the same length")

    def __len__(self):
        return self.amplitudes.shape[0]

    def to_dict(self) -> dict:
        d = {"id": self.id,
             "points": [{"pos": p.tolist(), "amp": float(a)}
                        for p, a in zip(self.positions, self.amplitudes)]}
        d.update(self.extra)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ControlPointSet":
        pts = d["points"]
        extra = {k: v for k, v in d.items() if k not in ("id", "points")}
        return cls([p["pos"] for p in pts], [p["amp"] for p in pts], id=d.get("id"), extra=extra)


def _panel(nx, ny, pitch, z, nz):
    gx = (np.arange(nx) - (nx - 1) / 2.0) * pitch
    gy = (np.arange(ny) - (ny - 1) / 2.0) * pitch
    # row-major: y is the slow index
    yy, xx = np.meshgrid(gy, gx, indexing="ij")
    pos = np.column_stack([xx.ravel(), yy.ravel(), np.full(nx * ny, float(z))])
    nrm = np.tile([0.0, 0.0, float(nz)], (nx * ny, 1))
    return pos, nrm


def build_single_sided(nx: int, ny: int, pitch: float = DEFAULT_PITCH, z: float = 0.0,
                       radius: float = DEFAULT_RADIUS, p_ref: float = DEFAULT_P_REF) -> ArrayLayout:
    """Square grid of ``nx*ny`` transducers centred on the z axis, facing +z."""
    if nx < 1 or ny < 1:
        raise ValueError("nx and ny must be at least 1")
    if not pitch > 0:
        raise ValueError("pitch must be positive")
    pos, nrm = _panel(nx, ny, pitch, z, 1.0)
    return ArrayLayout(pos, nrm, radius, p_ref, label=f"single-sided-{nx}x{ny}")


def build_single_axis(nx: int, ny: int, pitch: float = DEFAULT_PITCH,
                      separation: float = SINGLE_AXIS_SEPARATION,
                      radius: float = DEFAULT_RADIUS, p_ref: float = DEFAULT_P_REF) -> ArrayLayout:
    """Two facing panels: bottom at z=0 (normal +z) listed first, top at ``separation`` (normal -z)."""
    if nx < 1 or ny < 1:
        raise ValueError("nx and ny must be at least 1")
    if not pitch > 0:
        raise ValueError("pitch must be positive")
    if not separation > 0:
        raise ValueError("separation must be positive")
    p1, n1 = _panel(nx, ny, pitch, 0.0, 1.0)
    p2, n2 = _panel(nx, ny, pitch, separation, -1.0)
    return ArrayLayout(np.vstack([p1, p2]), np.vstack([n1, n2]), radius, p_ref,
                       label=f"single-axis-{nx}x{ny}")


def default_roi(layout: ArrayLayout, half: float = 0.05) -> Roi:
    """Benchmark ROI: a cube of half-width ``half``.

    Centred at z=0.1 m for single-sided arrays and midway between panels for
    facing arrays.
    """
    zs = np.unique(layout.positions[:, 2])
    if len(zs) == 2 and np.any(layout.normals[:, 2] < 0):
        zc = 0.5 * (zs[0] + zs[1])
    else:
        zc = float(zs[0]) + 0.1
    return Roi((0.0, 0.0, zc), (half, half, half))


def roi_vertices(roi: Roi) -> np.ndarray:
    """The 8 corners of ``roi`` in binary order: x varies slowest, z fastest, minus before plus."""
    c = np.asarray(roi.center)
    h = np.asarray(roi.half_extent)
    signs = np.array([[sx, sy, sz] for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)], dtype=float)
    return c + signs * h


def random_amplitudes(rng: np.random.Generator, n: int, total_amplitude: float,
                      min_amplitude: float = MIN_AMPLITUDE) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be at least 1")
    budget = total_amplitude - n * min_amplitude
    if budget < 0:
        raise ValueError(
            f"infeasible amplitude budget: total {total_amplitude} Pa < {n} x {min_amplitude} Pa")
    # uniform on the simplex via normalised exponentials
    e = rng.standard_exponential(n)
    w = e / e.sum()
    return min_amplitude + budget * w


def generate_random_geometry(rng: np.random.Generator, roi: Roi, n: int, total_amplitude: float,
                             min_amplitude: float = MIN_AMPLITUDE, id=None) -> ControlPointSet:
    """Draw ``n`` control points uniformly in ``roi`` with amplitudes summing to ``total_amplitude``.

    Positions are drawn before amplitudes from the same generator, so the output
    depends only on the generator state.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if total_amplitude < n * min_amplitude:
        raise ValueError(
            f"infeasible amplitude budget: total {total_amplitude} Pa < {n} x {min_amplitude} Pa")
    pos = rng.uniform(roi.lower, roi.upper, size=(n, 3))
    amps = random_amplitudes(rng, n, total_amplitude, min_amplitude)
    return ControlPointSet(pos, amps, id=id)


def rng_info(seed) -> dict:
    """Metadata identifying the PRNG stream used for a dataset."""
    return {"seed": seed, "bit_generator": "PCG64", "library": "numpy", "version": np.__version__}


#: Named layouts used by the CLI and the benchmark harness.
NAMED_ARRAYS = {
    "single-sided-14": lambda pitch=DEFAULT_PITCH: _relabel(build_single_sided(14, 14, pitch), "single-sided-14"),
    "single-axis-16": lambda pitch=DEFAULT_PITCH: _relabel(build_single_axis(16, 16, pitch), "single-axis-16"),
    "single-sided-32": lambda pitch=DEFAULT_PITCH: _relabel(build_single_sided(32, 32, pitch), "single-sided-32"),
}
#: Transducer count -> named layout, for ``N=..:M=..`` benchmark cells.
ARRAY_BY_M = {196: "single-sided-14", 512: "single-axis-16", 1024: "single-sided-32"}


def _relabel(layout, label):
    layout.label = label
    return layout


def named_array(name: str, pitch: float = DEFAULT_PITCH) -> ArrayLayout:
    try:
        return NAMED_ARRAYS[name](pitch)
    except KeyError:
        raise ValueError(f"unknown array {name!r}; choose from {sorted(NAMED_ARRAYS)}") from None
