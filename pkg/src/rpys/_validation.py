"""Input validation helpers used by the estimators and the functional API."""
from __future__ import annotations

import numbers
from typing import Iterable

from .model import AggregatedCR, CitedRef, YearRange


def check_threshold(threshold) -> float:
    if isinstance(threshold, bool) or not isinstance(threshold, numbers.Real):
        raise TypeError(f"threshold must be a real number, got {threshold!r}")
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must lie in [0, 1], got {threshold}")
    return float(threshold)


def check_window(window) -> int:
    if isinstance(window, bool) or not isinstance(window, numbers.Integral):
        raise TypeError(f"window must be an integer, got {window!r}")
    if window < 3 or window % 2 == 0:
        raise ValueError(f"window must be an odd integer >= 3, got {window}")
    return int(window)


def check_bounds(bounds) -> tuple[int, int]:
    """Validate an inclusive ``(lo, hi)`` pair of counts."""
    try:
        lo, hi = bounds
    except (TypeError, ValueError):
        raise TypeError(f"bounds must be a (lo, hi) pair, got {bounds!r}") from None
    if int(lo) != lo or int(hi) != hi:
        raise TypeError(f"bounds must be integers, got {bounds!r}")
    if lo > hi:
        raise ValueError(f"bounds must satisfy lo <= hi, got [{lo}, {hi}]")
    return int(lo), int(hi)


def check_year_range(value) -> YearRange:
    return YearRange.coerce(value)


def check_occurrences(X: Iterable) -> list[CitedRef]:
    occurrences = list(X)
    for i, cr in enumerate(occurrences):
        if not isinstance(cr, CitedRef):
            raise TypeError(f"element {i} is {type(cr).__name__}, expected CitedRef")
    return occurrences


def check_aggregates(X: Iterable) -> list[AggregatedCR]:
    aggregates = list(X)
    for i, agg in enumerate(aggregates):
        if not isinstance(agg, AggregatedCR):
            raise TypeError(f"element {i} is {type(agg).__name__}, expected AggregatedCR")
    return aggregates
