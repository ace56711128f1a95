"""Command-line interface.

Subcommands::

    phaseholo optimize-pat   --array single-sided-14 --points pts.json --out runs/a
    phaseholo optimize-plate --target chart.pgm --solver diffpat --out runs/p
    phaseholo bench          --cells N=2:M=196 --geometries 100 --seed 1 --out runs/b
    phaseholo propagate      --input field --distance 0.02 --out runs/f/out

Exit codes: 0 success, 1 numerical failure, 2 usage error. Every subcommand
writes ``config.json`` (the fully resolved options) into its output directory.
Options may also come from ``--config file.json``; explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__, bench, gridio
from ._backend import BACKEND
from .asm import AsmOptions, ComplexPlane, adjoint_propagate_cw, propagate_cw
from .charts import shipped_chart
from .field import AIR, MediumConfig, field_slice
from .geometry import DEFAULT_PITCH, ArrayLayout, ControlPointSet, default_roi, named_array
from .metrics import psnr
from .optim import (AdamConfig, PlateConfig, iasa, optimize_pat, optimize_plate, reconstruct,
                    scale_target, wrap_phase)

logger = logging.getLogger("phaseholo")


class UsageError(Exception):
    """Bad arguments or unreadable inputs (exit code 2)."""


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=1, default=_json_default))


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Path):
        return str(o)
    raise TypeError(f"not JSON serialisable: {type(o)}")


def _snapshot(args, out_dir: Path, **extra):
    d = {k: v for k, v in vars(args).items() if k not in ("func", "config")}
    d.update(version=__version__, backend=BACKEND, **extra)
    _write_json(out_dir / "config.json", d)


def _load_points(args) -> ControlPointSet:
    if args.points:
        path = Path(args.points)
        if not path.is_file():
            raise UsageError(f"points file not found: {path}")
        text = path.read_text()
        try:
            try:
                data = json.loads(text)
            except json.JSONDecodeError:
                lines = [json.loads(l) for l in text.splitlines() if l.strip()]
                data = next(l for l in lines if l.get("id") == args.geometry_id) \
                    if args.geometry_id is not None else lines[0]
            if isinstance(data, list):
                data = {"points": data}
            return ControlPointSet.from_dict(data)
        except (KeyError, ValueError, TypeError, StopIteration) as exc:
            raise UsageError(f"malformed points file {path}: {exc}") from exc
    if args.point:
        try:
            vals = [[float(v) for v in p.split(",")] for p in args.point]
            if any(len(v) != 4 for v in vals):
                raise ValueError("expected x,y,z,amp")
        except ValueError as exc:
            raise UsageError(f"bad --point: {exc}") from exc
        return ControlPointSet([v[:3] for v in vals], [v[3] for v in vals])
    raise UsageError("no control points given: use --points FILE or --point x,y,z,amp")


def cmd_optimize_pat(args) -> int:
    if args.layout:
        if not Path(args.layout).is_file():
            raise UsageError(f"layout file not found: {args.layout}")
        try:
            layout = ArrayLayout.load(args.layout)
        except (KeyError, ValueError) as exc:
            raise UsageError(f"malformed layout file: {exc}") from exc
    else:
        try:
            layout = named_array(args.array, args.pitch)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    geometry = _load_points(args)
    if args.iters < 0:
        raise UsageError("--iters must be non-negative")
    medium = MediumConfig(args.frequency, args.speed_of_sound)
    adam = AdamConfig(args.alpha, args.beta1, args.beta2, args.epsilon)

    rec = optimize_pat(layout, geometry, medium, iters=args.iters, seed=args.seed, adam=adam)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "phases.json", wrap_phase(rec.final_phases).tolist())
    rec.save(out / "record.json", include_phases=False)
    z = args.slice_z if args.slice_z is not None else default_roi(layout).center[2]
    fld, dx = field_slice(layout, rec.final_phases, z, args.slice_half_width, args.slice_n, medium)
    gridio.write_grid(out / f"field_z{z:g}", fld, dx, z_m=z, x0_m=-args.slice_half_width,
                      y0_m=-args.slice_half_width)
    _snapshot(args, out, array_label=layout.label, M=len(layout))
    print(f"final loss {rec.loss[-1]:.6g} Pa^2, mean R_p {rec.rp_mean[-1]:.4f}")
    return 0


def cmd_optimize_plate(args) -> int:
    if args.target:
        target_path = Path(args.target)
        if not target_path.is_file():
            raise UsageError(f"target image not found: {target_path}")
    else:
        target_path = shipped_chart(args.chart)
    try:
        image = gridio.read_pgm(target_path)
    except gridio.FormatError as exc:
        raise UsageError(str(exc)) from exc
    scale = args.target_scale if args.target_scale == "rms" else float(args.target_scale)
    cfg = PlateConfig(frequency=args.frequency, speed_of_sound=args.speed_of_sound, dx=args.dx,
                      distance=args.distance, n=image.shape[0], iters=args.iters,
                      source_amp=args.source_amp,
                      aperture_diameter=None if args.aperture <= 0 else args.aperture,
                      pad_factor=args.pad_factor, evanescent_mode=args.evanescent,
                      target_scale=scale)
    if not image.max() > 0:
        raise UsageError("target has zero peak")
    target = scale_target(image, cfg)
    if args.solver == "diffpat":
        rec, phase = optimize_plate(target, cfg, seed=args.seed)
    else:
        phase, rec = iasa(target, cfg)
    amp = reconstruct(phase, cfg)
    value = psnr(amp, target)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    gridio.write_grid(out / "phase", wrap_phase(phase).astype(np.complex128), cfg.dx, quantity="phase_rad")
    gridio.write_grid(out / "amplitude", amp.astype(np.complex128), cfg.dx, quantity="amplitude_pa",
                      z_m=cfg.distance)
    report = {"solver": args.solver, "psnr_db": value, "target": str(target_path), "n": cfg.n,
              "target_peak_pa": float(target.max()), "final_loss": rec.loss[-1],
              "loss": rec.loss, "wall_time_s": rec.wall_time_s, "config": cfg.to_dict()}
    _write_json(out / "report.json", report)
    _snapshot(args, out, target_resolved=str(target_path))
    print(f"{args.solver}: PSNR {value:.2f} dB")
    return 0


def cmd_bench(args) -> int:
    try:
        cells = [bench.Cell.parse(c) for spec in args.cells for c in spec.split(",") if c]
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    solvers = tuple(s for s in args.solvers.split(",") if s)
    geometries = bench.FULL_GEOMETRIES if args.full else args.geometries
    try:
        cfg = bench.BenchConfig(cells=cells or bench.BenchConfig().cells, geometries=geometries,
                                iterations=args.iters, master_seed=args.seed, pitch=args.pitch,
                                solvers=solvers, jobs=args.jobs)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    paths = bench.generate_dataset(cfg, out)
    res = bench.run_benchmark(paths, solvers, args.iters, args.pitch, out, args.jobs)
    if args.checkpoints:
        try:
            cps = [int(c) for c in args.checkpoints.split(",")]
        except ValueError as exc:
            raise UsageError(f"bad --checkpoints: {exc}") from exc
        bench.convergence_sweep(paths, cps, args.pitch, out, args.jobs)
    _snapshot(args, out, bench_config=cfg.to_dict())
    for row in res.boxes:
        print(f"{row[0]} M={row[1]} N={row[2]} {row[3]}: median R_p {row[6]:.4f} IQR {row[8]:.4f}")
    if res.errors:
        print(f"{len(res.errors)} geometries failed; see errors.csv", file=sys.stderr)
    return 0


def cmd_propagate(args) -> int:
    try:
        values, dx, _ = gridio.read_grid(args.input)
        plane = ComplexPlane(values, dx)
    except (gridio.FormatError, ValueError) as exc:
        raise UsageError(f"malformed grid: {exc}") from exc
    if args.distance < 0:
        raise UsageError("--distance must be non-negative")
    k = MediumConfig(args.frequency, args.speed_of_sound).k
    opts = AsmOptions(args.pad_factor, args.evanescent)
    res = (adjoint_propagate_cw if args.adjoint else propagate_cw)(plane, args.distance, k, opts)
    out = Path(args.out)
    if out.suffix in (".bin", ".json"):
        out = out.with_suffix("")
    out.parent.mkdir(parents=True, exist_ok=True)
    gridio.write_grid(out, res.values, res.dx, distance_m=args.distance, adjoint=bool(args.adjoint))
    _snapshot(args, out.parent)
    return 0


def _common_plate_medium(p, frequency, c):
    p.add_argument("--frequency", type=float, default=frequency, help="Hz")
    p.add_argument("--speed-of-sound", type=float, default=c, help="m/s")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phaseholo", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND})")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimize-pat", help="optimise transducer phases for control points")
    p.add_argument("--config", help="JSON file with option defaults")
    p.add_argument("--array", default="single-sided-14", help="named layout")
    p.add_argument("--layout", help="layout JSON file (overrides --array)")
    p.add_argument("--pitch", type=float, default=DEFAULT_PITCH)
    p.add_argument("--points", help="control points JSON (or JSON lines dataset)")
    p.add_argument("--geometry-id", type=int, help="pick this id from a JSON lines dataset")
    p.add_argument("--point", action="append", help="inline point x,y,z,amp (repeatable)")
    p.add_argument("--iters", type=int, default=150)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--beta1", type=float, default=0.9)
    p.add_argument("--beta2", type=float, default=0.999)
    p.add_argument("--epsilon", type=float, default=1e-8)
    p.add_argument("--slice-z", type=float, help="z of the exported field slice (default ROI centre)")
    p.add_argument("--slice-half-width", type=float, default=0.05)
    p.add_argument("--slice-n", type=int, default=101)
    _common_plate_medium(p, AIR.frequency, AIR.speed_of_sound)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_optimize_pat)

    p = sub.add_parser("optimize-plate", help="optimise a phase plate for a PGM target")
    p.add_argument("--config", help="JSON file with option defaults")
    p.add_argument("--target", help="8-bit binary PGM (P5), square")
    p.add_argument("--chart", type=int, choices=(64, 256), default=256,
                   help="use the packaged test chart when --target is absent")
    p.add_argument("--solver", choices=("diffpat", "iasa"), default="diffpat")
    p.add_argument("--iters", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dx", type=float, default=150e-6, help="pixel pitch (m)")
    p.add_argument("--distance", type=float, default=0.02, help="plate to image plane (m)")
    p.add_argument("--source-amp", type=float, default=1.0, help="Pa")
    p.add_argument("--aperture", type=float, default=0.035, help="source diameter (m); <=0 for none")
    p.add_argument("--target-scale", default="1.0", help="Pa per white pixel, or 'rms'")
    p.add_argument("--pad-factor", type=int, choices=(1, 2, 4), default=2)
    p.add_argument("--evanescent", choices=("decay", "zero"), default="decay")
    _common_plate_medium(p, 2e6, 1480.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_optimize_plate)

    p = sub.add_parser("bench", help="randomised benchmark over (N, M) cells")
    p.add_argument("--config", help="JSON file with option defaults")
    p.add_argument("--cells", nargs="*", default=[], help="cells like N=2:M=196 (default: all)")
    p.add_argument("--geometries", type=int, help="geometries per cell (default desk scale)")
    p.add_argument("--full", action="store_true", help="1000 geometries per cell")
    p.add_argument("--iters", type=int, default=150)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pitch", type=float, default=DEFAULT_PITCH)
    p.add_argument("--solvers", default="diffpat", help="comma list from diffpat,focal-single")
    p.add_argument("--checkpoints", help="comma list of iterations for convergence.csv")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("propagate", help="angular spectrum propagation of a field grid")
    p.add_argument("--config", help="JSON file with option defaults")
    p.add_argument("--input", required=True, help="field grid path (with or without .bin)")
    p.add_argument("--distance", type=float, required=True)
    p.add_argument("--adjoint", action="store_true")
    p.add_argument("--pad-factor", type=int, choices=(1, 2, 4), default=2)
    p.add_argument("--evanescent", choices=("decay", "zero"), default="decay")
    _common_plate_medium(p, 2e6, 1480.0)
    p.add_argument("--out", required=True, help="output grid path")
    p.set_defaults(func=cmd_propagate)
    return parser


def _parse(parser, argv):
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        try:
            file_values = json.loads(Path(args.config).read_text())
        except (OSError, ValueError) as exc:
            parser.error(f"cannot read config {args.config}: {exc}")
        file_values = {k.replace("-", "_"): v for k, v in file_values.items()}
        sub = parser._subparsers._group_actions[0].choices[args.command]
        unknown = set(file_values) - {a.dest for a in sub._actions}
        if unknown:
            parser.error(f"unknown keys in config file: {sorted(unknown)}")
        sub.set_defaults(**file_values)
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    parser = build_parser()
    args = _parse(parser, argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, FloatingPointError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
