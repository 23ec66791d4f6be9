"""Minimal deterministic SVG charts.

Charts are emitted as plain SVG strings built from fixed-format numbers,
so identical inputs produce byte-identical files; no GUI toolkit is
involved.  Every chart written by the report stage gets a sibling CSV
with the exact plotted values, and these helpers only draw.
"""

from __future__ import annotations

import math
from typing import List, Optional, Sequence, Tuple

WIDTH = 640
HEIGHT = 420
MARGIN = 54

PALETTE = ("#4477aa", "#ee6677", "#228833", "#ccbb44", "#66ccee", "#aa3377")


def _fmt(value: float) -> str:
    return "%.2f" % value


def _tick_label(value: float) -> str:
    return "%.3g" % value


class Frame:
    """Maps data coordinates onto the pixel canvas."""

    def __init__(self, x_min, x_max, y_min, y_max):
        if x_max <= x_min:
            x_max = x_min + 1.0
        if y_max <= y_min:
            y_max = y_min + 1.0
        self.x_min, self.x_max = x_min, x_max
        self.y_min, self.y_max = y_min, y_max

    def px(self, x: float) -> float:
        return MARGIN + (x - self.x_min) / (self.x_max - self.x_min) * (WIDTH - 2 * MARGIN)

    def py(self, y: float) -> float:
        return HEIGHT - MARGIN - (y - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - 2 * MARGIN)


def _axes(frame: Frame, title: str, x_label: str, y_label: str) -> List[str]:
    x0, x1 = MARGIN, WIDTH - MARGIN
    y0, y1 = HEIGHT - MARGIN, MARGIN
    parts = [
        '<rect width="%d" height="%d" fill="white"/>' % (WIDTH, HEIGHT),
        '<line x1="%d" y1="%d" x2="%d" y2="%d" stroke="black"/>' % (x0, y0, x1, y0),
        '<line x1="%d" y1="%d" x2="%d" y2="%d" stroke="black"/>' % (x0, y0, x0, y1),
        '<text x="%d" y="24" text-anchor="middle" font-size="15">%s</text>'
        % (WIDTH // 2, title),
        '<text x="%d" y="%d" text-anchor="middle" font-size="12">%s</text>'
        % (WIDTH // 2, HEIGHT - 14, x_label),
        '<text x="16" y="%d" text-anchor="middle" font-size="12" '
        'transform="rotate(-90 16 %d)">%s</text>' % (HEIGHT // 2, HEIGHT // 2, y_label),
    ]
    for t in (0.0, 0.5, 1.0):
        x_val = frame.x_min + t * (frame.x_max - frame.x_min)
        y_val = frame.y_min + t * (frame.y_max - frame.y_min)
        parts.append('<line x1="%s" y1="%d" x2="%s" y2="%d" stroke="black"/>'
                     % (_fmt(frame.px(x_val)), y0, _fmt(frame.px(x_val)), y0 + 5))
        parts.append('<text x="%s" y="%d" text-anchor="middle" font-size="11">%s</text>'
                     % (_fmt(frame.px(x_val)), y0 + 18, _tick_label(x_val)))
        parts.append('<line x1="%d" y1="%s" x2="%d" y2="%s" stroke="black"/>'
                     % (x0 - 5, _fmt(frame.py(y_val)), x0, _fmt(frame.py(y_val))))
        parts.append('<text x="%d" y="%s" text-anchor="end" font-size="11">%s</text>'
                     % (x0 - 8, _fmt(frame.py(y_val) + 4), _tick_label(y_val)))
    return parts


def _document(parts: Sequence[str]) -> str:
    return ('<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d">\n'
            % (WIDTH, HEIGHT) + "\n".join(parts) + "\n</svg>\n")


def _legend(labels: Sequence[str]) -> List[str]:
    parts = []
    for i, label in enumerate(labels):
        y = MARGIN + 8 + 18 * i
        color = PALETTE[i % len(PALETTE)]
        parts.append('<rect x="%d" y="%d" width="12" height="12" fill="%s"/>'
                     % (WIDTH - MARGIN - 150, y - 10, color))
        parts.append('<text x="%d" y="%d" font-size="11">%s</text>'
                     % (WIDTH - MARGIN - 133, y, label))
    return parts


def histogram_svg(edges: Sequence[float], counts: Sequence[int], title: str,
                  x_label: str = "value", y_label: str = "count") -> str:
    """Bar chart over precomputed bins; empty counts give an axes-only
    chart."""
    top = max(counts) if counts else 0
    frame = Frame(edges[0] if len(edges) else 0.0,
                  edges[-1] if len(edges) else 1.0,
                  0.0, float(top) if top else 1.0)
    parts = _axes(frame, title, x_label, y_label)
    for i, count in enumerate(counts):
        if count <= 0:
            continue
        x_left, x_right = frame.px(edges[i]), frame.px(edges[i + 1])
        y_top, y_base = frame.py(count), frame.py(0)
        parts.append('<rect x="%s" y="%s" width="%s" height="%s" fill="%s" '
                     'stroke="white" stroke-width="0.5"/>'
                     % (_fmt(x_left), _fmt(y_top), _fmt(x_right - x_left),
                        _fmt(y_base - y_top), PALETTE[0]))
    return _document(parts)


def scatter_svg(points: Sequence[Tuple[float, float]], title: str,
                x_label: str, y_label: str, diagonal: bool = False,
                log_scale: bool = False) -> str:
    """Scatter plot; with log_scale both axes show log10 of the values
    (zeros are dropped)."""
    if log_scale:
        points = [(math.log10(x), math.log10(y)) for x, y in points if x > 0 and y > 0]
    if points:
        xs = [p[0] for p in points]
        ys = [p[1] for p in points]
        lo = min(min(xs), min(ys))
        hi = max(max(xs), max(ys))
        frame = Frame(lo, hi, lo, hi)
    else:
        frame = Frame(0.0, 1.0, 0.0, 1.0)
    parts = _axes(frame, title, x_label, y_label)
    if diagonal:
        parts.append('<line x1="%s" y1="%s" x2="%s" y2="%s" stroke="#999" '
                     'stroke-dasharray="4 3"/>'
                     % (_fmt(frame.px(frame.x_min)), _fmt(frame.py(frame.y_min)),
                        _fmt(frame.px(frame.x_max)), _fmt(frame.py(frame.y_max))))
    for x, y in points:
        parts.append('<circle cx="%s" cy="%s" r="2.5" fill="%s" fill-opacity="0.6"/>'
                     % (_fmt(frame.px(x)), _fmt(frame.py(y)), PALETTE[0]))
    return _document(parts)


def cdf_svg(series: Sequence[Tuple[str, Sequence[float]]], title: str,
            x_label: str = "value", y_label: str = "CDF") -> str:
    """Step-function CDFs for one or more labeled series of sorted values."""
    all_values = [v for _, values in series for v in values]
    frame = Frame(min(all_values) if all_values else 0.0,
                  max(all_values) if all_values else 1.0, 0.0, 1.0)
    parts = _axes(frame, title, x_label, y_label)
    for i, (label, values) in enumerate(series):
        if not len(values):
            continue
        n = len(values)
        coords = ["%s,%s" % (_fmt(frame.px(values[0])), _fmt(frame.py(0.0)))]
        for j, v in enumerate(values):
            y = (j + 1) / n
            coords.append("%s,%s" % (_fmt(frame.px(v)), _fmt(frame.py(j / n))))
            coords.append("%s,%s" % (_fmt(frame.px(v)), _fmt(frame.py(y))))
        parts.append('<polyline points="%s" fill="none" stroke="%s" stroke-width="1.5"/>'
                     % (" ".join(coords), PALETTE[i % len(PALETTE)]))
    parts.extend(_legend([label for label, _ in series]))
    return _document(parts)


def curve_svg(points: Sequence[Tuple[float, float]],
              curve: Sequence[Tuple[float, float]], title: str,
              x_label: str, y_label: str,
              curve_label: Optional[str] = None) -> str:
    """Scatter plus a fitted curve drawn through it."""
    xs = [p[0] for p in points] + [c[0] for c in curve]
    ys = [p[1] for p in points] + [c[1] for c in curve]
    frame = Frame(min(xs) if xs else 0.0, max(xs) if xs else 1.0,
                  min(ys) if ys else 0.0, max(ys) if ys else 1.0)
    parts = _axes(frame, title, x_label, y_label)
    for x, y in points:
        parts.append('<circle cx="%s" cy="%s" r="2.5" fill="%s" fill-opacity="0.55"/>'
                     % (_fmt(frame.px(x)), _fmt(frame.py(y)), PALETTE[0]))
    if curve:
        coords = " ".join("%s,%s" % (_fmt(frame.px(x)), _fmt(frame.py(y)))
                          for x, y in curve)
        parts.append('<polyline points="%s" fill="none" stroke="%s" stroke-width="2"/>'
                     % (coords, PALETTE[1]))
    if curve_label:
        parts.append('<text x="%d" y="%d" font-size="11" fill="%s">%s</text>'
                     % (WIDTH - MARGIN - 150, MARGIN + 8, PALETTE[1], curve_label))
    return _document(parts)


def line_svg(series: Sequence[Tuple[str, Sequence[Tuple[float, float]]]],
             title: str, x_label: str, y_label: str) -> str:
    """Plain line chart for one or more labeled (x, y) series."""
    xs = [p[0] for _, pts in series for p in pts]
    ys = [p[1] for _, pts in series for p in pts]
    frame = Frame(min(xs) if xs else 0.0, max(xs) if xs else 1.0,
                  min(ys + [0.0]) if ys else 0.0, max(ys) if ys else 1.0)
    parts = _axes(frame, title, x_label, y_label)
    for i, (label, pts) in enumerate(series):
        if not pts:
            continue
        coords = " ".join("%s,%s" % (_fmt(frame.px(x)), _fmt(frame.py(y))) for x, y in pts)
        color = PALETTE[i % len(PALETTE)]
        parts.append('<polyline points="%s" fill="none" stroke="%s" stroke-width="2"/>'
                     % (coords, color))
        for x, y in pts:
            parts.append('<circle cx="%s" cy="%s" r="3" fill="%s"/>'
                         % (_fmt(frame.px(x)), _fmt(frame.py(y)), color))
    parts.extend(_legend([label for label, _ in series]))
    return _document(parts)
