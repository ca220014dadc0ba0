"""Columnar plot-data files and minimal static SVG line plots."""

from __future__ import annotations

import math
from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np

Series = Tuple[str, Sequence[float], Sequence[float]]

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _num(v) -> str:
    v = float(v)
    if math.isnan(v):
        return "nan"
    return f"{v:.10g}"


def write_columns(path: Path, names: Sequence[str], columns: Sequence[Sequence[float]],
                  comments: Sequence[str] = ()) -> None:
    cols = [np.asarray(c, dtype=float) for c in columns]
    n = len(cols[0])
    if any(len(c) != n for c in cols):
        raise ValueError("columns differ in length")
    lines = [f"# {c}" for c in comments] + ["# " + " ".join(names)]
    for i in range(n):
        lines.append(" ".join(_num(c[i]) for c in cols))
    Path(path).write_text("\n".join(lines) + "\n")


def _ticks(lo: float, hi: float, n: int = 5) -> List[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    out = []
    t = start
    while t <= hi + 1e-12 * step:
        out.append(t)
        t += step
    return out


def line_plot(path: Path, series: Sequence[Series], xlabel: str, ylabel: str, title: str = "",
              logy: bool = False, vlines: Sequence[float] = (), markers: Sequence[bool] = ()) -> None:
    """Write a small SVG with one polyline (or point set) per series."""
    w, h, ml, mr, mt, mb = 560, 380, 70, 150, 30, 50
    pw, ph = w - ml - mr, h - mt - mb
    tf = (lambda v: np.log10(np.maximum(v, 1e-300))) if logy else (lambda v: v)
    xs = np.concatenate([np.asarray(s[1], dtype=float) for s in series])
    ys = np.concatenate([tf(np.asarray(s[2], dtype=float)) for s in series])
    ok = np.isfinite(xs) & np.isfinite(ys)
    x0, x1 = float(xs[ok].min()), float(xs[ok].max())
    y0, y1 = float(ys[ok].min()), float(ys[ok].max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def px(x):
        return ml + (x - x0) / (x1 - x0) * pw

    def py(y):
        return mt + ph - (y - y0) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="11">',
           f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    if title:
        out.append(f'<text x="{ml + pw / 2:.1f}" y="18" text-anchor="middle">{title}</text>')
    for t in _ticks(x0, x1):
        out.append(f'<text x="{px(t):.1f}" y="{mt + ph + 15}" text-anchor="middle">{t:g}</text>')
    for t in _ticks(y0, y1):
        label = f"1e{t:g}" if logy else f"{t:g}"
        out.append(f'<text x="{ml - 5}" y="{py(t) + 4:.1f}" text-anchor="end">{label}</text>')
    out.append(f'<text x="{ml + pw / 2:.1f}" y="{h - 10}" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="15" y="{mt + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 15 {mt + ph / 2:.1f})">{ylabel}</text>')
    for v in vlines:
        out.append(f'<line x1="{px(v):.1f}" y1="{mt}" x2="{px(v):.1f}" y2="{mt + ph}" '
                   'stroke="gray" stroke-dasharray="4 3"/>')
    for i, (label, sx, sy) in enumerate(series):
        color = _COLORS[i % len(_COLORS)]
        sx = np.asarray(sx, dtype=float)
        sy = tf(np.asarray(sy, dtype=float))
        keep = np.isfinite(sx) & np.isfinite(sy)
        pts = [(px(a), py(b)) for a, b in zip(sx[keep], sy[keep])]
        if i < len(markers) and markers[i]:
            out.extend(f'<circle cx="{a:.1f}" cy="{b:.1f}" r="2.5" fill="{color}"/>' for a, b in pts)
        elif pts:
            d = " ".join(f"{a:.1f},{b:.1f}" for a, b in pts)
            out.append(f'<polyline points="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = mt + 12 + 16 * i
        out.append(f'<line x1="{ml + pw + 10}" y1="{ly - 4}" x2="{ml + pw + 28}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{ml + pw + 32}" y="{ly}">{label}</text>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")
