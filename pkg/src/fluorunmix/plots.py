"""Minimal deterministic SVG charts (no plotting dependency).

Two chart kinds cover every figure the CLI emits: multi-series line charts
(library curves, per-wavelength KL curves, spectra overlays) and scatter
charts with an optional fitted line (noise mean vs variance). Output is
plain SVG text with a fixed layout and repr-formatted coordinates, so
identical inputs produce byte-identical files.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError

__all__ = ["render_line_chart", "render_scatter_chart"]

WIDTH = 880
HEIGHT = 540
MARGIN_LEFT = 72
MARGIN_RIGHT = 180
MARGIN_TOP = 48
MARGIN_BOTTOM = 56

PALETTE = (
    "#1f77b4",
    "#ff7f0e",
    "#2ca02c",
    "#d62728",
    "#9467bd",
    "#8c564b",
    "#e377c2",
    "#7f7f7f",
    "#bcbd22",
    "#17becf",
)

_AXIS_STYLE = 'stroke="#333" stroke-width="1"'
_TEXT = 'font-family="monospace" font-size="12" fill="#222"'


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _tick_label(v: float) -> str:
    return f"{v:.4g}"


def _bounds(values: np.ndarray) -> tuple[float, float]:
    lo = float(np.min(values))
    hi = float(np.max(values))
    if lo == hi:
        pad = 1.0 if lo == 0.0 else abs(lo) * 0.05
        return lo - pad, hi + pad
    pad = (hi - lo) * 0.05
    return lo - pad, hi + pad


class _Frame:
    """Maps data coordinates into the fixed plot rectangle."""

    def __init__(self, x_bounds, y_bounds):
        self.x0, self.x1 = x_bounds
        self.y0, self.y1 = y_bounds
        self.px0 = MARGIN_LEFT
        self.px1 = WIDTH - MARGIN_RIGHT
        self.py0 = HEIGHT - MARGIN_BOTTOM
        self.py1 = MARGIN_TOP

    def x(self, v: float) -> float:
        t = (v - self.x0) / (self.x1 - self.x0)
        return self.px0 + t * (self.px1 - self.px0)

    def y(self, v: float) -> float:
        t = (v - self.y0) / (self.y1 - self.y0)
        return self.py0 + t * (self.py1 - self.py0)


def _axes(frame: _Frame, xlabel: str, ylabel: str, title: str) -> list[str]:
    parts = [
        f'<rect x="{frame.px0}" y="{frame.py1}" width="{frame.px1 - frame.px0}" '
        f'height="{frame.py0 - frame.py1}" fill="none" {_AXIS_STYLE}/>'
    ]
    for i in range(5):
        xv = frame.x0 + i * (frame.x1 - frame.x0) / 4
        yv = frame.y0 + i * (frame.y1 - frame.y0) / 4
        px, py = frame.x(xv), frame.y(yv)
        parts.append(
            f'<line x1="{_fmt(px)}" y1="{frame.py0}" x2="{_fmt(px)}" '
            f'y2="{frame.py0 + 5}" {_AXIS_STYLE}/>'
        )
        parts.append(
            f'<text x="{_fmt(px)}" y="{frame.py0 + 20}" text-anchor="middle" '
            f"{_TEXT}>{_tick_label(xv)}</text>"
        )
        parts.append(
            f'<line x1="{frame.px0 - 5}" y1="{_fmt(py)}" x2="{frame.px0}" '
            f'y2="{_fmt(py)}" {_AXIS_STYLE}/>'
        )
        parts.append(
            f'<text x="{frame.px0 - 8}" y="{_fmt(py + 4)}" text-anchor="end" '
            f"{_TEXT}>{_tick_label(yv)}</text>"
        )
    cx = (frame.px0 + frame.px1) / 2
    parts.append(
        f'<text x="{_fmt(cx)}" y="{HEIGHT - 12}" text-anchor="middle" '
        f"{_TEXT}>{_escape(xlabel)}</text>"
    )
    parts.append(
        f'<text x="18" y="{_fmt((frame.py0 + frame.py1) / 2)}" text-anchor="middle" '
        f'{_TEXT} transform="rotate(-90 18 {_fmt((frame.py0 + frame.py1) / 2)})">'
        f"{_escape(ylabel)}</text>"
    )
    parts.append(
        f'<text x="{_fmt(cx)}" y="24" text-anchor="middle" '
        f'font-family="monospace" font-size="14" fill="#000">{_escape(title)}</text>'
    )
    return parts


def _legend(names: list[str]) -> list[str]:
    parts = []
    lx = WIDTH - MARGIN_RIGHT + 16
    for i, name in enumerate(names):
        color = PALETTE[i % len(PALETTE)]
        ly = MARGIN_TOP + 10 + 18 * i
        parts.append(
            f'<line x1="{lx}" y1="{ly}" x2="{lx + 18}" y2="{ly}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{lx + 24}" y="{ly + 4}" {_TEXT}>{_escape(name)}</text>'
        )
    return parts


def _escape(text: str) -> str:
    return (
        str(text).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    )


def _document(body: list[str]) -> str:
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">\n'
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>\n'
    )
    return head + "\n".join(body) + "\n</svg>\n"


def render_line_chart(
    x, series: dict[str, np.ndarray], xlabel: str, ylabel: str, title: str
) -> str:
    """SVG line chart: one polyline per named series over a shared x axis."""
    x = np.asarray(x, dtype=float)
    if x.size < 2 or not series:
        raise ValidationError("line chart needs >= 2 x points and >= 1 series")
    Y = [np.asarray(v, dtype=float) for v in series.values()]
    for y in Y:
        if y.shape != x.shape:
            raise ValidationError("series lengths must match the x grid")
        if not np.all(np.isfinite(y)):
            raise ValidationError("series values must be finite")
    frame = _Frame(_bounds(x), _bounds(np.concatenate(Y)))
    body = _axes(frame, xlabel, ylabel, title)
    for i, (name, y) in enumerate(series.items()):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{_fmt(frame.x(a))},{_fmt(frame.y(b))}" for a, b in zip(x, y))
        body.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" '
            'stroke-width="1.5"/>'
        )
    body.extend(_legend(list(series)))
    return _document(body)


def render_scatter_chart(
    x,
    y,
    xlabel: str,
    ylabel: str,
    title: str,
    fit: tuple[float, float] | None = None,
) -> str:
    """SVG scatter chart with an optional fitted line y = slope*x + intercept."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 1 or x.shape != y.shape:
        raise ValidationError("scatter chart needs matching non-empty x and y")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValidationError("scatter values must be finite")
    frame = _Frame(_bounds(x), _bounds(y))
    body = _axes(frame, xlabel, ylabel, title)
    for a, b in zip(x, y):
        body.append(
            f'<circle cx="{_fmt(frame.x(a))}" cy="{_fmt(frame.y(b))}" r="2.5" '
            f'fill="{PALETTE[0]}" fill-opacity="0.6"/>'
        )
    names = ["samples"]
    if fit is not None:
        slope, intercept = fit
        xa, xb = frame.x0, frame.x1
        body.append(
            f'<line x1="{_fmt(frame.x(xa))}" y1="{_fmt(frame.y(slope * xa + intercept))}" '
            f'x2="{_fmt(frame.x(xb))}" y2="{_fmt(frame.y(slope * xb + intercept))}" '
            f'stroke="{PALETTE[1]}" stroke-width="2"/>'
        )
        names.append(f"fit: y = {slope:.4g} x + {intercept:.4g}")
    body.extend(_legend(names))
    return _document(body)
