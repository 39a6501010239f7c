"""Spectrograms: NCR per reference publication year, median deviation, peaks."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ._validation import check_window
from .model import AggregatedCR, RPYSError, YearRange
from .wos import normalize_cr

__all__ = [
    "Spectrogram",
    "SpectrogramPoint",
    "TableRow",
    "WindowTooLarge",
    "compute_spectrogram",
    "detect_peaks",
    "find_peaks",
    "median_deviation",
    "ranking_key",
    "top_crs",
]

PEAK_REL_TOL = 1e-9


class WindowTooLarge(RPYSError, ValueError):
    pass


@dataclass(frozen=True)
class SpectrogramPoint:
    rpy: int
    ncr: int
    n_distinct_crs: int
    median_dev: float


@dataclass(frozen=True)
class Spectrogram:
    """One point per year of ``[rpy_lo, rpy_hi]`` plus the detected peak years."""

    points: tuple[SpectrogramPoint, ...]
    peaks: tuple[int, ...] = ()
    window: int = 5

    @property
    def years(self) -> np.ndarray:
        return np.array([p.rpy for p in self.points], dtype=int)

    @property
    def ncr(self) -> np.ndarray:
        return np.array([p.ncr for p in self.points], dtype=int)

    @property
    def median_dev(self) -> np.ndarray:
        return np.array([p.median_dev for p in self.points], dtype=float)

    @property
    def rpy_lo(self) -> Optional[int]:
        return self.points[0].rpy if self.points else None

    @property
    def rpy_hi(self) -> Optional[int]:
        return self.points[-1].rpy if self.points else None

    def __len__(self) -> int:
        return len(self.points)


def _median_deviation(values: np.ndarray, window: int) -> np.ndarray:
    half = window // 2
    padded = np.pad(values.astype(float), half, constant_values=np.nan)
    medians = np.nanmedian(sliding_window_view(padded, window), axis=1)
    return values - medians


def median_deviation(series: Sequence[float], window: int = 5) -> np.ndarray:
    """NCR minus the median of the centred ``window``-year neighbourhood.

    Near the ends of the series the window is cut to the years that
    exist; an even-sized window takes the mean of its two middle values.

    >>> median_deviation([1, 2, 10, 2, 1]).tolist()
    [-1.0, 0.0, 8.0, 0.0, -1.0]
    """
    window = check_window(window)
    values = np.asarray(series, dtype=float)
    if window > len(values):
        raise WindowTooLarge(f"window {window} exceeds series length {len(values)}")
    return _median_deviation(values, window)


def find_peaks(deviations: Sequence[float]) -> list[int]:
    """Indices ``t`` with ``dev[t] > 0``, ``dev[t] >= dev[t-1]`` and ``dev[t] > dev[t+1]``.

    End points are compared with their single neighbour. Comparisons use
    a tolerance of ``1e-9 * max|dev|`` so that rescaling a series by a
    positive factor does not flip ties through rounding.
    """
    dev = np.asarray(deviations, dtype=float)
    if dev.size == 0:
        return []
    tol = PEAK_REL_TOL * float(np.max(np.abs(dev)))
    peaks = []
    last = len(dev) - 1
    for t, value in enumerate(dev):
        if value <= tol:
            continue
        if t > 0 and value < dev[t - 1] - tol:
            continue
        if t < last and value <= dev[t + 1] + tol:
            continue
        peaks.append(t)
    return peaks


def detect_peaks(spectrogram: Spectrogram) -> list[int]:
    """Peak years of ``spectrogram``, ascending."""
    years = [p.rpy for p in spectrogram.points]
    return [years[t] for t in find_peaks([p.median_dev for p in spectrogram.points])]


def compute_spectrogram(
    aggregates: Iterable[AggregatedCR],
    rpy_range,
    window: int = 5,
) -> Spectrogram:
    """Place aggregates on the year axis and derive deviations and peaks.

    Aggregates whose canonical year is missing or outside ``rpy_range``
    are not plotted. If the range is shorter than ``window`` the window
    shrinks to the longest odd length that fits.
    """
    rpy_range = YearRange.coerce(rpy_range)
    window = check_window(window)
    years = list(rpy_range.years)
    ncr = dict.fromkeys(years, 0)
    distinct = dict.fromkeys(years, 0)
    for agg in aggregates:
        if agg.rpy is not None and rpy_range.lo <= agg.rpy <= rpy_range.hi:
            ncr[agg.rpy] += agg.ncr
            distinct[agg.rpy] += 1

    values = np.array([ncr[y] for y in years], dtype=float)
    effective = min(window, len(years) if len(years) % 2 else len(years) - 1)
    dev = _median_deviation(values, max(effective, 1))
    points = tuple(
        SpectrogramPoint(y, ncr[y], distinct[y], float(d)) for y, d in zip(years, dev)
    )
    spec = Spectrogram(points, window=window)
    return Spectrogram(points, tuple(detect_peaks(spec)), window)


def ranking_key(agg: AggregatedCR):
    """Total order for CR tables: NCR desc, then RPY asc, then key."""
    rpy = agg.rpy if agg.rpy is not None else math.inf
    return (-agg.ncr, rpy, normalize_cr(agg.canonical), agg.canonical.doi or "", agg.canonical.raw)


@dataclass(frozen=True)
class TableRow:
    rank: int
    rpy: Optional[int]
    cr: str
    ncr: int
    aggregate: AggregatedCR


def top_crs(
    aggregates: Iterable[AggregatedCR],
    n: Optional[int] = 10,
    within_year: Optional[int] = None,
) -> list[TableRow]:
    """The ``n`` most cited aggregates (all of them when ``n`` is None)."""
    if n is not None and n < 1:
        raise ValueError("n must be a positive integer")
    pool = [a for a in aggregates if within_year is None or a.rpy == within_year]
    ranked = sorted(pool, key=ranking_key)
    if n is not None:
        ranked = ranked[:n]
    return [TableRow(i, a.rpy, a.display, a.ncr, a) for i, a in enumerate(ranked, start=1)]
