"""Accuracy metrics: amplitude ratios, box-plot statistics and PSNR."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

#: Returned by :func:`psnr` for an exact match.
PSNR_CAP = 1000.0


def rp(pressures, targets) -> np.ndarray:
    """Achieved-to-target amplitude ratio ``|p| / A`` per control point."""
    targets = np.asarray(targets, dtype=np.float64)
    if np.any(targets == 0):
        raise ValueError("zero target amplitude")
    if np.any(targets < 0):
        raise ValueError("target amplitudes must be positive")
    return np.abs(np.asarray(pressures)) / targets


@dataclass
class BoxStats:
    q1: float
    median: float
    q3: float
    whisker_low: float
    whisker_high: float
    outliers: list = field(default_factory=list)
    n: int = 0

    @property
    def iqr(self) -> float:
        return self.q3 - self.q1

    def to_dict(self) -> dict:
        return {"n": self.n, "q1": self.q1, "median": self.median, "q3": self.q3, "iqr": self.iqr,
                "whisker_low": self.whisker_low, "whisker_high": self.whisker_high,
                "n_outliers": len(self.outliers)}


def box_stats(values, whisker: float = 1.5) -> BoxStats:
    """Quartiles, whiskers and outliers of ``values``.

    Quartiles interpolate linearly between the closest ranks with the
    (n - 1) p positioning (``numpy.percentile`` "linear" method): for sorted data
    ``x[0..n-1]`` the p-quantile sits at fractional index ``(n - 1) p``.
    Whiskers reach the most extreme data points within ``whisker * IQR`` of the box;
    anything beyond is an outlier.
    """
    x = np.sort(np.asarray(values, dtype=np.float64).ravel())
    if x.size == 0:
        raise ValueError("box_stats needs at least one value")
    q1, med, q3 = np.percentile(x, [25, 50, 75], method="linear")
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - whisker * iqr, q3 + whisker * iqr
    inside = x[(x >= lo_fence) & (x <= hi_fence)]
    return BoxStats(float(q1), float(med), float(q3), float(inside.min()), float(inside.max()),
                    x[(x < lo_fence) | (x > hi_fence)].tolist(), int(x.size))


def psnr(candidate, reference) -> float:
    """Peak signal-to-noise ratio (dB) with the peak taken as ``max(reference)``."""
    candidate = np.asarray(candidate, dtype=np.float64)
    reference = np.asarray(reference, dtype=np.float64)
    if candidate.shape != reference.shape:
        raise ValueError(f"shape mismatch: {candidate.shape} vs {reference.shape}")
    peak = reference.max()
    if not np.any(reference):
        raise ValueError("reference image is identically zero")
    mse = np.mean((candidate - reference) ** 2)
    if mse == 0:
        return PSNR_CAP
    return float(min(10.0 * np.log10(peak * peak / mse), PSNR_CAP))


#: Per-point CSV columns emitted by the benchmark harness.
RESULT_COLUMNS = ["array_label", "M", "N", "geometry_id", "solver", "iterations",
                  "point_index", "target_pa", "achieved_pa", "rp", "seed"]
