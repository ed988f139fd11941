"""Analytic fractal count families and box-count dimension estimation.

These constructions have known exact dimensions, so they double as the
independently verifiable oracle for the log-log regression machinery used by
the boundary analysis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

_COUNT_LIMIT = 2**63 - 1


@dataclass(frozen=True)
class BoxCountSeries:
    """Pairs (cell edge delta, occupied cell count), delta strictly decreasing."""

    points: tuple[tuple[float, int], ...]

    def __post_init__(self):
        if len(self.points) < 2:
            raise ValueError("series needs at least 2 points")
        deltas = [d for d, _ in self.points]
        counts = [c for _, c in self.points]
        if any(not (0.0 < d < 1.0) for d in deltas):
            raise ValueError("every delta must lie in (0, 1)")
        if any(d2 >= d1 for d1, d2 in zip(deltas, deltas[1:])):
            raise ValueError("deltas must be strictly decreasing")
        if any(c < 1 for c in counts):
            raise ValueError("counts must be positive")
        if any(c2 < c1 for c1, c2 in zip(counts, counts[1:])):
            raise ValueError("counts must be non-decreasing as delta shrinks")


@dataclass(frozen=True)
class FractalFamily:
    """Self-similar count family: b pieces per parent at scale factor 1/s."""

    branches: int
    scale: int
    iterations: int

    def __post_init__(self):
        if self.branches < 1:
            raise ValueError("branches must be >= 1")
        if self.scale < 2:
            raise ValueError("scale must be >= 2")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        # 1-D families need b <= s; the classic quadruple-split at scale 3
        # is the one permitted exception.
        if self.branches > self.scale and (self.branches, self.scale) != (4, 3):
            raise ValueError(
                f"branches={self.branches} exceeds scale={self.scale}; "
                "only (branches=4, scale=3) is allowed beyond 1-D families"
            )


def family_counts(fam: FractalFamily) -> BoxCountSeries:
    """Exact series (delta_m, count_m) = (s^-m, b^m) for m = 1..M."""
    if fam.branches**fam.iterations > _COUNT_LIMIT:
        raise OverflowError(
            f"{fam.branches}^{fam.iterations} exceeds the supported count range"
        )
    points = tuple(
        (float(fam.scale) ** -m, fam.branches**m) for m in range(1, fam.iterations + 1)
    )
    return BoxCountSeries(points)


def middle_thirds_points(iterations: int, per_segment: int = 3) -> np.ndarray:
    """Point set sampling the classic remove-the-middle-third construction,
    for end-to-end testing of box counting on geometry (dimension ln2/ln3).

    Points sit strictly inside the surviving segments so none land exactly on
    a cell boundary of any grid coarser than the segments themselves.
    """
    segments = [(0.0, 1.0)]
    for _ in range(iterations):
        next_segments = []
        for lo, hi in segments:
            third = (hi - lo) / 3.0
            next_segments.append((lo, lo + third))
            next_segments.append((hi - third, hi))
        segments = next_segments
    pts = []
    for lo, hi in segments:
        for k in range(per_segment):
            pts.append(lo + (hi - lo) * (k + 0.5) / per_segment)
    return np.asarray(pts)[:, None]


def box_count_points(points: np.ndarray, delta: float) -> int:
    """Count distinct cells of edge delta occupied by points in the unit cube.

    Cells are [i*delta, (i+1)*delta) per axis; the top edge of the cube is
    clamped into the last cell.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    if points.size == 0:
        raise ValueError("box count of an empty point set is undefined")
    if not (0.0 < delta <= 1.0):
        raise ValueError("delta must lie in (0, 1]")
    if points.min() < 0.0 or points.max() > 1.0:
        raise ValueError("all coordinates must lie in [0, 1]")
    # number of cells per axis; the (1 - 1e-12) guard absorbs float noise in
    # 1/delta when delta divides 1 exactly in real arithmetic
    n_cells = int(math.ceil((1.0 / delta) * (1.0 - 1e-12)))
    idx = np.floor(points / delta).astype(np.int64)
    np.clip(idx, 0, n_cells - 1, out=idx)
    return int(np.unique(idx, axis=0).shape[0])


@dataclass(frozen=True)
class DimensionEstimate:
    d: float
    pearson_r: float
    se_slope: float


@dataclass(frozen=True)
class LogLogFit:
    slope: float
    intercept: float
    pearson_r: float
    se_slope: float


def fit_loglog(xs: Sequence[float], ys: Sequence[float]) -> LogLogFit:
    """Ordinary least squares of ln(y) against ln(x).

    se_slope is the standard error of the slope, defined as 0 for a
    two-point fit.
    """
    if len(xs) != len(ys):
        raise ValueError("xs and ys must have equal length")
    n = len(xs)
    if n < 2:
        raise ValueError("need at least 2 points to fit")
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    if not (np.isfinite(lx).all() and np.isfinite(ly).all()):
        raise ValueError("all points must be positive and finite")
    mx = lx.mean()
    my = ly.mean()
    sxx = float(np.sum((lx - mx) ** 2))
    syy = float(np.sum((ly - my) ** 2))
    sxy = float(np.sum((lx - mx) * (ly - my)))
    if sxx == 0.0:
        raise ValueError("degenerate abscissae: all x values equal")
    slope = sxy / sxx
    intercept = my - slope * mx
    if syy == 0.0:
        # exactly horizontal data: perfectly fit by slope 0
        return LogLogFit(slope=0.0, intercept=my, pearson_r=0.0, se_slope=0.0)
    pearson_r = sxy / math.sqrt(sxx * syy)
    if n == 2:
        se_slope = 0.0
    else:
        # residuals computed directly; the syy - slope*sxy shortcut cancels
        # catastrophically on near-exact fits
        residuals = ly - (intercept + slope * lx)
        sse = float(np.sum(residuals**2))
        se_slope = math.sqrt(sse / (n - 2) / sxx)
    return LogLogFit(slope=slope, intercept=intercept, pearson_r=pearson_r, se_slope=se_slope)


def estimate_dimension(series: BoxCountSeries | Iterable[tuple[float, int]]) -> DimensionEstimate:
    """Box-count dimension by least squares of ln(count) on ln(delta).

    Accepts a BoxCountSeries or any iterable of (delta, count) pairs; the
    estimate does not depend on the ordering of the pairs.
    """
    points = series.points if isinstance(series, BoxCountSeries) else tuple(series)
    if len(points) < 2:
        raise ValueError("series needs at least 2 points")
    deltas = [d for d, _ in points]
    counts = [c for _, c in points]
    fit = fit_loglog(deltas, counts)
    return DimensionEstimate(d=-fit.slope, pearson_r=fit.pearson_r, se_slope=fit.se_slope)
