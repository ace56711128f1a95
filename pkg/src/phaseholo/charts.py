"""Binary test targets for phase-plate runs.

``usaf_chart`` draws a resolution chart in the style of USAF 1951. Each element
is a block of three vertical bars beside a block of three horizontal bars; bars
are ``w`` wide, ``5 w`` long and separated by ``w``. Element widths shrink from
12 to 2 pixels (at 256 px) so the finest elements fall below the half-wavelength
limit of the default plate setup. Smaller charts are box-downsampled from the
256 px layout and re-binarised.

The shipped ``data/usaf_chart_256.pgm`` and ``data/usaf_chart_64.pgm`` are
written by :func:`write_shipped_charts`.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

#: (bar width, x, y) of each element on the 256 px layout; rows are shelf packed.
_ELEMENTS = [
    (12, 28, 36),
    (9, 28, 108), (7, 144, 108),
    (6, 28, 165), (5, 108, 165), (4, 176, 165),
    (3, 28, 205), (2, 72, 205),
]
#: Solid reference square (x, y, size).
_SQUARE = (180, 42, 48)


def _element(img, x0, y0, w):
    for b in range(3):
        img[y0:y0 + 5 * w, x0 + 2 * b * w:x0 + (2 * b + 1) * w] = 1.0
    x1 = x0 + 7 * w
    for b in range(3):
        img[y0 + 2 * b * w:y0 + (2 * b + 1) * w, x1:x1 + 5 * w] = 1.0


def _chart256() -> np.ndarray:
    img = np.zeros((256, 256))
    for w, x, y in _ELEMENTS:
        _element(img, x, y, w)
    x, y, s = _SQUARE
    img[y:y + s, x:x + s] = 1.0
    return img


def usaf_chart(n: int = 256) -> np.ndarray:
    """Binary chart of size ``n x n`` (values 0 or 1); ``n`` must divide 256."""
    if n < 16 or 256 % n:
        raise ValueError("chart size must be a divisor of 256 and at least 16")
    img = _chart256()
    if n == 256:
        return img
    f = 256 // n
    small = img.reshape(n, f, n, f).mean(axis=(1, 3))
    return (small >= 0.5).astype(np.float64)


def shipped_chart(n: int = 256) -> Path:
    """Path to the packaged chart PGM of size ``n`` (64 or 256)."""
    return Path(str(resources.files("phaseholo") / "data" / f"usaf_chart_{n}.pgm"))


def write_shipped_charts(directory=None):
    from .gridio import write_pgm

    directory = Path(directory) if directory else Path(__file__).parent / "data"
    for n in (64, 256):
        write_pgm(directory / f"usaf_chart_{n}.pgm", usaf_chart(n))
