"""Minimal self-contained SVG line plots with a log-scale y axis."""

from __future__ import annotations

import math
from typing import Sequence
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=70, right=20, top=40, bottom=50)
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def log_plot(x: Sequence[float], series: dict[str, Sequence[float]], title: str,
             xlabel: str = "j", ylabel: str = "value") -> str:
    """One polyline (plus point markers) per series; y on a base-10 log scale."""
    ys = [v for vals in series.values() for v in vals if v > 0]
    if not ys or not x:
        raise ValueError("nothing positive to plot")
    lo = math.floor(math.log10(min(ys)))
    hi = math.ceil(math.log10(max(ys)))
    if hi == lo:
        hi += 1
    x0, x1 = min(x), max(x)
    if x1 == x0:
        x1 = x0 + 1
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(v):
        return MARGIN["left"] + pw * (v - x0) / (x1 - x0)

    def py(v):
        return MARGIN["top"] + ph * (hi - math.log10(v)) / (hi - lo)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" '
        'fill="none" stroke="black"/>',
    ]
    for e in range(lo, hi + 1):
        y = _fmt(py(10.0**e))
        out.append(f'<line x1="{MARGIN["left"]}" y1="{y}" x2="{MARGIN["left"] + pw}" y2="{y}" '
                   'stroke="#dddddd"/>')
        out.append(f'<text x="{MARGIN["left"] - 6}" y="{y}" text-anchor="end" '
                   f'dominant-baseline="middle">1e{e}</text>')
    for v in sorted(set(x)):
        out.append(f'<text x="{_fmt(px(v))}" y="{MARGIN["top"] + ph + 16}" '
                   f'text-anchor="middle">{v:g}</text>')
    out.append(f'<text x="{MARGIN["left"] + pw / 2}" y="{HEIGHT - 10}" '
               f'text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{MARGIN["top"] + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 16 {MARGIN["top"] + ph / 2})">{escape(ylabel)}</text>')
    for k, (name, vals) in enumerate(series.items()):
        color = COLORS[k % len(COLORS)]
        pts = [(px(a), py(b)) for a, b in zip(x, vals) if b > 0]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="'
                   + " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in pts) + '"/>')
        for a, b in pts:
            out.append(f'<circle cx="{_fmt(a)}" cy="{_fmt(b)}" r="2.5" fill="{color}"/>')
        ly = MARGIN["top"] + 14 + 16 * k
        lx = MARGIN["left"] + 10
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{color}" '
                   'stroke-width="2"/>')
        out.append(f'<text x="{lx + 26}" y="{ly}" dominant-baseline="middle">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
