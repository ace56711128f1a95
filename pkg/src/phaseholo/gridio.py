"""File formats: complex field grids and 8-bit PGM targets.

A field grid is two files: ``<name>.bin`` holding little-endian float64
``(real, imag)`` pairs in row-major order over ``values[ix, iy]``, and
``<name>.json`` with ``{"nx", "ny", "dx_m", "kind": "complex128"}``.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

_DTYPE = np.dtype("<c16")


class FormatError(ValueError):
    """Input file does not match the expected format."""


def _paths(path):
    path = Path(path)
    if path.suffix in (".bin", ".json"):
        path = path.with_suffix("")
    return path.with_name(path.name + ".bin"), path.with_name(path.name + ".json")


def write_grid(path, values: np.ndarray, dx: float, **meta) -> tuple[Path, Path]:
    """Write ``values`` to ``path.bin`` plus its ``path.json`` sidecar.

    ``path`` may be given with or without the ``.bin`` suffix.
    """
    values = np.asarray(values, dtype=np.complex128)
    if values.ndim != 2:
        raise ValueError("grid must be two-dimensional")
    bin_path, json_path = _paths(path)
    bin_path.write_bytes(np.ascontiguousarray(values, dtype=_DTYPE).tobytes())
    side = {"nx": int(values.shape[0]), "ny": int(values.shape[1]), "dx_m": float(dx), "kind": "complex128"}
    side.update(meta)
    json_path.write_text(json.dumps(side, indent=1))
    return bin_path, json_path


def read_grid(path) -> tuple[np.ndarray, float, dict]:
    """Read a field grid; returns ``(values, dx, sidecar)``."""
    bin_path, json_path = _paths(path)
    try:
        side = json.loads(json_path.read_text())
        nx, ny, dx = int(side["nx"]), int(side["ny"]), float(side["dx_m"])
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise FormatError(f"{json_path}: bad or missing sidecar ({exc})") from exc
    if side.get("kind") != "complex128":
        raise FormatError(f"{json_path}: unsupported kind {side.get('kind')!r}")
    try:
        raw = bin_path.read_bytes()
    except OSError as exc:
        raise FormatError(f"{bin_path}: {exc}") from exc
    if len(raw) != nx * ny * _DTYPE.itemsize:
        raise FormatError(f"{bin_path}: expected {nx * ny * _DTYPE.itemsize} bytes, found {len(raw)}")
    vals = np.frombuffer(raw, dtype=_DTYPE).astype(np.complex128).reshape(nx, ny)
    if not np.all(np.isfinite(vals)):
        raise FormatError(f"{bin_path}: non-finite samples")
    return vals, dx, side


def read_pgm(path) -> np.ndarray:
    """Load a square binary (P5) PGM as a float array in [0, 1]."""
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(2)
    if magic != b"P5":
        raise FormatError(f"{path}: not a binary PGM (P5) file")
    with Image.open(path) as im:
        if im.mode not in ("L", "I", "I;16", "I;16B"):
            raise FormatError(f"{path}: unexpected PGM mode {im.mode}")
        arr = np.asarray(im, dtype=np.float64)
        maxval = 255.0 if im.mode == "L" else float(arr.max() or 1.0)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise FormatError(f"{path}: target image must be square, got {arr.shape}")
    return arr / maxval


def write_pgm(path, image: np.ndarray):
    """Write an image in [0, 1] as 8-bit P5 PGM."""
    img = np.clip(np.rint(np.asarray(image) * 255.0), 0, 255).astype(np.uint8)
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())
