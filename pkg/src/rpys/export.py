"""CSV exports (CR table and spectrogram) and static SVG spectrogram plots.

The CSV writers always produce the same bytes for the same input: UTF-8,
LF line endings, minimal RFC 4180 quoting and fixed six-decimal floats.
"""
from __future__ import annotations

import csv
import io
import os
from typing import Iterable, Mapping, Optional, Sequence, Union
from xml.sax.saxutils import escape

import numpy as np

from .model import AggregatedCR, RPYSError
from .spectroscopy import Spectrogram, SpectrogramPoint, top_crs

__all__ = [
    "EmptySeries",
    "cr_csv_text",
    "export_cr_csv",
    "export_graph_csv",
    "graph_csv_text",
    "plot_values",
    "read_graph_csv",
    "render_svg",
]

CR_HEADER = ("rank", "rpy", "cr", "ncr", "n_variants")
GRAPH_HEADER = ("rpy", "ncr", "median_dev", "is_peak")

WIDTH, HEIGHT = 900, 500
_LEFT, _RIGHT, _TOP, _BOTTOM = 80, 20, 50, 60
NCR_COLOR = "#d00000"
DEV_COLOR = "#0040d0"
PALETTE = ("#d00000", "#0040d0", "#008a3e", "#e07b00", "#7a1fa2", "#00838f", "#5d4037", "#c2185b")

Destination = Union[str, os.PathLike, io.TextIOBase]


class EmptySeries(RPYSError, ValueError):
    pass


def _fmt_float(value: float) -> str:
    # adding 0.0 turns -0.0 into 0.0
    return f"{float(value) + 0.0:.6f}"


def _csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _write(text: str, destination: Destination) -> None:
    if isinstance(destination, (str, os.PathLike)):
        with open(destination, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        destination.write(text)


def cr_csv_text(aggregates: Iterable[AggregatedCR]) -> str:
    rows = [
        (row.rank, "" if row.rpy is None else row.rpy, row.cr, row.ncr, row.aggregate.n_variants)
        for row in top_crs(aggregates, None)
    ]
    return _csv_text(CR_HEADER, rows)


def export_cr_csv(aggregates: Iterable[AggregatedCR], destination: Destination) -> int:
    """Write the CR table (header ``rank,rpy,cr,ncr,n_variants``); return the row count."""
    aggregates = list(aggregates)
    _write(cr_csv_text(aggregates), destination)
    return len(aggregates)


def graph_csv_text(spectrogram: Spectrogram) -> str:
    peaks = set(spectrogram.peaks)
    rows = [
        (p.rpy, p.ncr, _fmt_float(p.median_dev), "true" if p.rpy in peaks else "false")
        for p in spectrogram.points
    ]
    return _csv_text(GRAPH_HEADER, rows)


def export_graph_csv(spectrogram: Spectrogram, destination: Destination) -> int:
    """Write one ``rpy,ncr,median_dev,is_peak`` row per year; return the row count."""
    years = [p.rpy for p in spectrogram.points]
    if years and years != list(range(years[0], years[-1] + 1)):
        raise ValueError("spectrogram years are not contiguous")
    _write(graph_csv_text(spectrogram), destination)
    return len(years)


def read_graph_csv(source: Union[str, os.PathLike, io.TextIOBase]) -> Spectrogram:
    """Load a file written by :func:`export_graph_csv` (distinct-CR counts are not stored)."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8", newline="") as fh:
            return read_graph_csv(fh)
    reader = csv.reader(source)
    header = tuple(next(reader, ()))
    if header != GRAPH_HEADER:
        raise ValueError(f"not a spectrogram CSV (header {','.join(header)!r})")
    points, peaks = [], []
    for row in reader:
        if not row:
            continue
        rpy, ncr, dev, is_peak = row
        points.append(SpectrogramPoint(int(rpy), int(ncr), 0, float(dev)))
        if is_peak == "true":
            peaks.append(int(rpy))
    return Spectrogram(tuple(points), tuple(peaks))


SeriesInput = Union[Spectrogram, Mapping[str, Spectrogram], Sequence[tuple[str, Spectrogram]]]


def _as_named(series: SeriesInput) -> list[tuple[str, Spectrogram]]:
    if isinstance(series, Spectrogram):
        return [("NCR", series)]
    if isinstance(series, Mapping):
        return list(series.items())
    return [(str(name), spec) for name, spec in series]


def plot_values(series: SeriesInput, normalize: bool = False) -> list[tuple[str, np.ndarray, np.ndarray]]:
    """``(name, years, ncr)`` per series, each scaled to max 1 when ``normalize``."""
    out = []
    for name, spec in _as_named(series):
        values = spec.ncr.astype(float)
        if normalize and values.size and values.max() > 0:
            values = values / values.max()
        out.append((name, spec.years, values))
    return out


def _nice_step(span: float, target: int) -> float:
    raw = span / max(target, 1)
    magnitude = 10 ** np.floor(np.log10(raw)) if raw > 0 else 1.0
    for factor in (1, 2, 5, 10):
        if factor * magnitude >= raw:
            return float(factor * magnitude)
    return float(10 * magnitude)


def _num(value: float) -> str:
    return f"{value + 0.0:.2f}"


def _tick_label(value: float, step: float) -> str:
    if step >= 1:
        return str(int(round(value)))
    digits = max(0, int(-np.floor(np.log10(step))))
    return f"{value:.{digits}f}"


class _Canvas:
    def __init__(self, x_lo, x_hi, y_lo, y_hi):
        self.x_lo, self.x_hi, self.y_lo, self.y_hi = x_lo, x_hi, y_lo, y_hi
        self.parts: list[str] = []

    def x(self, year: float) -> float:
        inner = WIDTH - _LEFT - _RIGHT
        if self.x_hi == self.x_lo:
            return _LEFT + inner / 2
        return _LEFT + (year - self.x_lo) / (self.x_hi - self.x_lo) * inner

    def y(self, value: float) -> float:
        inner = HEIGHT - _TOP - _BOTTOM
        return _TOP + (self.y_hi - value) / (self.y_hi - self.y_lo) * inner

    def add(self, text: str):
        self.parts.append(text)

    def line(self, x1, y1, x2, y2, stroke="#000000", extra=""):
        self.add(
            f'<line x1="{_num(x1)}" y1="{_num(y1)}" x2="{_num(x2)}" y2="{_num(y2)}" '
            f'stroke="{stroke}"{extra}/>'
        )

    def text(self, x, y, content, anchor="middle", size=12, extra=""):
        self.add(
            f'<text x="{_num(x)}" y="{_num(y)}" font-size="{size}" text-anchor="{anchor}"{extra}>'
            f"{escape(content)}</text>"
        )

    def curve(self, years, values, color, label):
        pts = " ".join(f"{_num(self.x(yr))},{_num(self.y(v))}" for yr, v in zip(years, values))
        self.add('<g class="series">')
        self.add(f"<title>{escape(label)}</title>")
        self.add(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        for yr, v in zip(years, values):
            self.add(f'<circle cx="{_num(self.x(yr))}" cy="{_num(self.y(v))}" r="2.5" fill="{color}"/>')
        self.add("</g>")

    def axes(self, y_label: str):
        x0, x1 = _LEFT, WIDTH - _RIGHT
        y0, y1 = HEIGHT - _BOTTOM, _TOP
        self.line(x0, y0, x1, y0)
        self.line(x0, y0, x0, y1)

        span = self.x_hi - self.x_lo
        step = max(1, int(_nice_step(span, 10))) if span > 0 else 1
        first = int(np.ceil(self.x_lo / step) * step)
        for year in range(first, int(self.x_hi) + 1, step):
            x = self.x(year)
            self.line(x, y0, x, y0 + 5)
            self.text(x, y0 + 20, str(year))
        self.text((x0 + x1) / 2, HEIGHT - 15, "Reference publication year")

        ystep = _nice_step(self.y_hi - self.y_lo, 8)
        tick = np.ceil(self.y_lo / ystep) * ystep
        while tick <= self.y_hi + 1e-9 * ystep:
            y = self.y(tick)
            self.line(x0 - 5, y, x0, y)
            self.text(x0 - 8, y + 4, _tick_label(tick, ystep), anchor="end")
            tick += ystep
        self.text(20, (y0 + y1) / 2, y_label, extra=f' transform="rotate(-90 20 {_num((y0 + y1) / 2)})"')

    def document(self) -> str:
        head = (
            '<?xml version="1.0" encoding="UTF-8" standalone="no"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">\n'
            f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>\n'
        )
        return head + "\n".join(self.parts) + "\n</svg>\n"


def _y_limits(arrays: Sequence[np.ndarray]) -> tuple[float, float]:
    lo = min(0.0, *(float(a.min()) for a in arrays))
    hi = max(0.0, *(float(a.max()) for a in arrays))
    if hi == lo:
        hi = lo + 1.0
    pad = 0.05 * (hi - lo)
    return lo - (pad if lo < 0 else 0.0), hi + pad


def render_svg(series: SeriesInput, normalize: bool = False, title: Optional[str] = None) -> str:
    """Render one or more spectrograms as an SVG 1.1 document (900x500).

    A single spectrogram is drawn as its NCR curve (red) and median
    deviation curve (blue). Several spectrograms are overlaid as NCR
    curves with a legend. ``normalize`` scales each NCR curve to a maximum
    of 1 (a single spectrogram's deviation curve shares its NCR scale).
    """
    named = _as_named(series)
    if not named or any(len(spec) == 0 for _, spec in named):
        raise EmptySeries("render_svg needs at least one non-empty spectrogram")
    years = named[0][1].years
    for name, spec in named[1:]:
        if not np.array_equal(spec.years, years):
            raise ValueError(f"series {name!r} does not share the year axis of {named[0][0]!r}")

    x_lo, x_hi = int(years[0]), int(years[-1])
    if len(named) == 1 and isinstance(series, Spectrogram):
        spec = named[0][1]
        ncr = spec.ncr.astype(float)
        dev = spec.median_dev
        if normalize and ncr.max() > 0:
            ncr, dev = ncr / ncr.max(), dev / ncr.max()
        canvas = _Canvas(x_lo, x_hi, *_y_limits([ncr, dev]))
        canvas.axes("NCR (normalized to max = 1)" if normalize else "Number of cited references")
        if canvas.y_lo < 0:
            canvas.line(_LEFT, canvas.y(0), WIDTH - _RIGHT, canvas.y(0), "#999999", ' stroke-dasharray="4 3"')
        canvas.curve(years, ncr, NCR_COLOR, "NCR")
        canvas.curve(years, dev, DEV_COLOR, f"{spec.window}-year median deviation")
        legend = [("NCR", NCR_COLOR), (f"{spec.window}-year median deviation", DEV_COLOR)]
    else:
        values = plot_values(named, normalize)
        canvas = _Canvas(x_lo, x_hi, *_y_limits([v for _, _, v in values]))
        canvas.axes("NCR (normalized to max = 1)" if normalize else "Number of cited references")
        legend = []
        for i, (name, yrs, vals) in enumerate(values):
            color = PALETTE[i % len(PALETTE)]
            label = f"{name} (normalized to max = 1)" if normalize else name
            canvas.curve(yrs, vals, color, label)
            legend.append((label, color))

    for i, (label, color) in enumerate(legend):
        y = _TOP + 8 + 16 * i
        canvas.add(f'<rect x="{_LEFT + 12}" y="{y - 8}" width="10" height="10" fill="{color}"/>')
        canvas.text(_LEFT + 28, y + 1, label, anchor="start", size=11)
    if title:
        canvas.text(WIDTH / 2, 24, title, size=14)
    return canvas.document()
