"""Randomised benchmark harness.

A benchmark is a set of cells, each a (named array, number of control points N)
pair. For every cell ``generate_dataset`` draws seeded random geometries whose
amplitudes sum to the array's calibrated single-focus pressure; ``run_benchmark``
solves every geometry and writes per-point results, per-cell box statistics and
timing; ``convergence_sweep`` records R_p statistics at chosen iterations.

Every geometry has its own seed derived from ``(master_seed, array, N, index)``,
so cells and geometries can be regenerated independently of each other.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .field import AIR, MediumConfig, calibrate_total_amplitude, focal_phases, propagation_matrix
from .geometry import (ARRAY_BY_M, DEFAULT_PITCH, MIN_AMPLITUDE, ControlPointSet, default_roi,
                       generate_random_geometry, named_array, rng_info)
from .metrics import RESULT_COLUMNS, box_stats
from .optim import AdamConfig, optimize_pat

logger = logging.getLogger(__name__)

SOLVERS = ("diffpat", "focal-single")
TIMING_COLUMNS = ["array_label", "M", "N", "solver", "mean_ms", "std_ms", "n_geometries"]
BOX_COLUMNS = ["array_label", "M", "N", "solver", "n", "q1", "median", "q3", "iqr",
               "whisker_low", "whisker_high", "n_outliers"]
CONVERGENCE_COLUMNS = ["array_label", "M", "N", "iteration", "mean_rp", "std_rp", "n_points"]

DEFAULT_ARRAYS = ("single-sided-14", "single-axis-16", "single-sided-32")
DEFAULT_N = (2, 8, 32)
FULL_GEOMETRIES = 1000


def desk_geometries(n: int) -> int:
    """Desk-scale geometry count per cell: 100 for N=2 down to 20 for N=32."""
    if n <= 2:
        return 100
    if n <= 8:
        return 50
    return 20


@dataclass(frozen=True)
class Cell:
    array: str
    n: int

    @classmethod
    def parse(cls, text: str) -> "Cell":
        """Parse ``N=2:M=196`` (or ``N=2:array=single-sided-14``)."""
        parts = dict(p.split("=", 1) for p in text.strip().split(":"))
        try:
            n = int(parts["N"])
            if "M" in parts:
                array = ARRAY_BY_M[int(parts["M"])]
            else:
                array = parts["array"]
        except (KeyError, ValueError) as exc:
            raise ValueError(f"bad cell spec {text!r}; expected N=<count>:M=<196|512|1024>") from exc
        if n < 1:
            raise ValueError("N must be at least 1")
        return cls(array, n)


@dataclass
class BenchConfig:
    cells: list = field(default_factory=lambda: [Cell(a, n) for a in DEFAULT_ARRAYS for n in DEFAULT_N])
    #: geometries per cell; ``None`` uses the desk-scale defaults
    geometries: int | None = None
    iterations: int = 150
    master_seed: int = 0
    pitch: float = DEFAULT_PITCH
    solvers: tuple = ("diffpat",)
    min_amplitude: float = MIN_AMPLITUDE
    jobs: int = 1

    def __post_init__(self):
        self.cells = [c if isinstance(c, Cell) else Cell(*c) for c in self.cells]
        if self.geometries is not None and self.geometries < 1:
            raise ValueError("geometries must be at least 1")
        for s in self.solvers:
            if s not in SOLVERS:
                raise ValueError(f"unknown solver {s!r}; choose from {SOLVERS}")

    def n_geometries(self, cell: Cell) -> int:
        return self.geometries if self.geometries is not None else desk_geometries(cell.n)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["cells"] = [f"N={c.n}:array={c.array}" for c in self.cells]
        d["solvers"] = list(self.solvers)
        return d


def derive_seed(master_seed: int, array_label: str, n: int, index: int, stream: str = "geometry") -> int:
    """64-bit seed from a SHA-256 of the identifying tuple."""
    key = f"{master_seed}|{array_label}|{n}|{index}|{stream}".encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "little")


def dataset_path(out_dir, cell: Cell) -> Path:
    return Path(out_dir) / f"dataset_{cell.array}_N{cell.n}.jsonl"


def generate_cell(cfg: BenchConfig, cell: Cell, medium: MediumConfig = AIR) -> list[ControlPointSet]:
    layout = named_array(cell.array, cfg.pitch)
    roi = default_roi(layout)
    total = calibrate_total_amplitude(layout, roi, medium)
    out = []
    for i in range(cfg.n_geometries(cell)):
        seed = derive_seed(cfg.master_seed, cell.array, cell.n, i)
        g = generate_random_geometry(np.random.default_rng(seed), roi, cell.n, total,
                                     cfg.min_amplitude, id=i)
        g.extra = {"seed": seed, "init_seed": derive_seed(cfg.master_seed, cell.array, cell.n, i, "phases"),
                   "total_amplitude": total, "array_label": cell.array}
        out.append(g)
    return out


def generate_dataset(cfg: BenchConfig, out_dir, medium: MediumConfig = AIR) -> list[Path]:
    """Write one JSON-lines file per cell (plus a ``.meta.json`` sidecar); returns the data paths."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create dataset directory {out_dir}: {exc}") from exc
    paths = []
    for cell in cfg.cells:
        geoms = generate_cell(cfg, cell, medium)
        path = dataset_path(out_dir, cell)
        layout = named_array(cell.array, cfg.pitch)
        roi = default_roi(layout)
        meta = {"array_label": cell.array, "M": len(layout), "N": cell.n, "pitch": cfg.pitch,
                "roi": {"center": list(roi.center), "half_extent": list(roi.half_extent)},
                "total_amplitude": geoms[0].extra["total_amplitude"],
                "seed_info": {**rng_info(cfg.master_seed), "derivation": "sha256(master|array|N|index|stream)"}}
        try:
            with open(path, "w") as fh:
                for g in geoms:
                    fh.write(json.dumps(g.to_dict()) + "\n")
            path.with_suffix(".meta.json").write_text(json.dumps(meta, indent=1))
        except OSError as exc:
            raise OSError(f"failed writing dataset {path}: {exc}") from exc
        paths.append(path)
    return paths


def load_dataset(path) -> list[ControlPointSet]:
    path = Path(path)
    try:
        with open(path) as fh:
            return [ControlPointSet.from_dict(json.loads(line)) for line in fh if line.strip()]
    except OSError as exc:
        raise OSError(f"cannot read dataset {path}: {exc}") from exc


def superposed_focal_phases(layout, geometry: ControlPointSet, medium: MediumConfig = AIR) -> np.ndarray:
    """Phases of the amplitude-weighted sum of single-focus holograms."""
    acc = np.zeros(len(layout), dtype=np.complex128)
    for x, a in zip(geometry.positions, geometry.amplitudes):
        acc += a * np.exp(1j * focal_phases(layout, x, medium))
    return np.angle(acc)


def _solve(args):
    """Solve one geometry with one solver; returns (rows, elapsed_s, error)."""
    array, pitch, gdict, solver, iters, adam = args
    g = ControlPointSet.from_dict(gdict)
    layout = named_array(array, pitch)
    seed = g.extra.get("init_seed", g.extra.get("seed"))
    t0 = time.perf_counter()
    try:
        G = propagation_matrix(layout, g.positions)
        if solver == "diffpat":
            rec = optimize_pat(layout, g, iters=iters, seed=seed, adam=adam, G=G)
            achieved = np.abs(G @ np.exp(1j * rec.final_phases))
            used_iters = iters
        else:
            achieved = np.abs(G @ np.exp(1j * superposed_focal_phases(layout, g)))
            used_iters = 0
    except (ValueError, FloatingPointError) as exc:
        return [], time.perf_counter() - t0, f"{type(exc).__name__}: {exc}"
    elapsed = time.perf_counter() - t0
    rows = [[array, len(layout), len(g), g.id, solver, used_iters, i, float(t), float(a), float(a / t),
             g.extra.get("seed")]
            for i, (t, a) in enumerate(zip(g.amplitudes, achieved))]
    return rows, elapsed, None


def _map(fn, tasks, jobs):
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    return [fn(t) for t in tasks]


@dataclass
class BenchResult:
    rows: list
    timing: list
    boxes: list
    errors: list


def run_benchmark(datasets, solvers=("diffpat",), iters: int = 150, pitch: float = DEFAULT_PITCH,
                  out_dir=None, jobs: int = 1, adam: AdamConfig = AdamConfig()) -> BenchResult:
    """Solve every geometry in ``datasets`` (paths or ``{Cell: [ControlPointSet]}``).

    Writes ``results.csv``, ``timing.csv``, ``boxstats.csv`` and, when any geometry
    fails, ``errors.csv`` into ``out_dir`` if given.
    """
    cells = _as_cells(datasets)
    rows, timing, boxes, errors = [], [], [], []
    for (array, n), geoms in cells:
        for solver in solvers:
            tasks = [(array, pitch, g.to_dict(), solver, iters, adam) for g in geoms]
            outs = _map(_solve, tasks, jobs)
            times = []
            cell_rows = []
            for g, (r, dt, err) in zip(geoms, outs):
                if err is not None:
                    errors.append([array, n, g.id, solver, err])
                    continue
                cell_rows.extend(r)
                times.append(dt * 1e3)
            rows.extend(cell_rows)
            M = len(named_array(array, pitch))
            if times:
                timing.append([array, M, n, solver, float(np.mean(times)), float(np.std(times)), len(times)])
            if cell_rows:
                b = box_stats([r[9] for r in cell_rows])
                boxes.append([array, M, n, solver, b.n, b.q1, b.median, b.q3, b.iqr,
                              b.whisker_low, b.whisker_high, len(b.outliers)])
    rows.sort(key=lambda r: (r[0], r[2], r[4], r[3], r[6]))
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_csv(out_dir / "results.csv", RESULT_COLUMNS, rows)
        write_csv(out_dir / "timing.csv", TIMING_COLUMNS, timing)
        write_csv(out_dir / "boxstats.csv", BOX_COLUMNS, boxes)
        if errors:
            write_csv(out_dir / "errors.csv", ["array_label", "N", "geometry_id", "solver", "error"], errors)
    return BenchResult(rows, timing, boxes, errors)


def _conv_task(args):
    array, pitch, gdict, iters = args
    g = ControlPointSet.from_dict(gdict)
    layout = named_array(array, pitch)
    rec = optimize_pat(layout, g, iters=iters, seed=g.extra.get("init_seed", g.extra.get("seed")))
    return rec.rp_history


def convergence_sweep(datasets, checkpoints, pitch: float = DEFAULT_PITCH, out_dir=None,
                      jobs: int = 1) -> list:
    """Mean and standard deviation of R_p over all points of all geometries at each checkpoint."""
    checkpoints = [int(c) for c in checkpoints]
    if not checkpoints or any(b <= a for a, b in zip(checkpoints, checkpoints[1:])) or checkpoints[0] < 0:
        raise ValueError("checkpoints must be a non-empty strictly ascending list of non-negative integers")
    rows = []
    for (array, n), geoms in _as_cells(datasets):
        hists = _map(_conv_task, [(array, pitch, g.to_dict(), checkpoints[-1]) for g in geoms], jobs)
        M = len(named_array(array, pitch))
        for c in checkpoints:
            vals = np.concatenate([h[c] for h in hists])
            rows.append([array, M, n, c, float(vals.mean()), float(vals.std()), int(vals.size)])
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        write_csv(Path(out_dir) / "convergence.csv", CONVERGENCE_COLUMNS, rows)
    return rows


def _as_cells(datasets):
    if isinstance(datasets, dict):
        items = [((c.array, c.n) if isinstance(c, Cell) else tuple(c), g) for c, g in datasets.items()]
    else:
        items = []
        for p in datasets:
            geoms = load_dataset(p)
            if not geoms:
                continue
            items.append(((geoms[0].extra["array_label"], len(geoms[0])), geoms))
    return items


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(x)) if isinstance(x, float) else x for x in r])
