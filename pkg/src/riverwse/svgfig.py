"""Minimal deterministic SVG line/scatter charts, no plotting dependency."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

WIDTH = 900
HEIGHT = 480
MARGIN = 60
N_TICKS = 6


@dataclass(frozen=True)
class Series:
    """One plotted series; style 'line' draws a polyline, 'points' crosses."""

    x: np.ndarray
    y: np.ndarray
    color: str
    label: str
    style: str = "line"  # 'line' | 'points' | 'dashed'


def _fmt(v: float) -> str:
    return f"{v:.9g}"


def _ticks(lo: float, hi: float) -> list[float]:
    if hi == lo:
        return [lo]
    return [lo + (hi - lo) * i / (N_TICKS - 1) for i in range(N_TICKS)]


def render(series_list: list[Series], x_label: str, y_label: str, title: str = "") -> str:
    xs = np.concatenate([np.asarray(s.x, float) for s in series_list if len(s.x)])
    ys = np.concatenate([np.asarray(s.y, float) for s in series_list if len(s.x)])
    x_lo, x_hi = float(xs.min()), float(xs.max())
    y_lo, y_hi = float(ys.min()), float(ys.max())
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pad = 0.03 * (y_hi - y_lo)
    y_lo -= pad
    y_hi += pad
    plot_w = WIDTH - 2 * MARGIN
    plot_h = HEIGHT - 2 * MARGIN

    def px(x: float) -> float:
        return MARGIN + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        return HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN}" y="{MARGIN}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="black" stroke-width="1"/>',
    ]
    if title:
        parts.append(f'<text x="{WIDTH / 2:.9g}" y="{MARGIN / 2:.9g}" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="16">{title}</text>')
    for tx in _ticks(x_lo, x_hi):
        parts.append(f'<line x1="{_fmt(px(tx))}" y1="{HEIGHT - MARGIN}" '
                     f'x2="{_fmt(px(tx))}" y2="{HEIGHT - MARGIN + 6}" stroke="black"/>')
        parts.append(f'<text x="{_fmt(px(tx))}" y="{HEIGHT - MARGIN + 22}" '
                     f'text-anchor="middle" font-family="sans-serif" font-size="11">'
                     f'{tx:.6g}</text>')
    for ty in _ticks(y_lo, y_hi):
        parts.append(f'<line x1="{MARGIN - 6}" y1="{_fmt(py(ty))}" '
                     f'x2="{MARGIN}" y2="{_fmt(py(ty))}" stroke="black"/>')
        parts.append(f'<text x="{MARGIN - 10}" y="{_fmt(py(ty) + 4)}" text-anchor="end" '
                     f'font-family="sans-serif" font-size="11">{ty:.6g}</text>')
    parts.append(f'<text x="{WIDTH / 2:.9g}" y="{HEIGHT - 14}" text-anchor="middle" '
                 f'font-family="sans-serif" font-size="13">{x_label}</text>')
    parts.append(f'<text x="16" y="{HEIGHT / 2:.9g}" text-anchor="middle" '
                 f'font-family="sans-serif" font-size="13" '
                 f'transform="rotate(-90 16 {HEIGHT / 2:.9g})">{y_label}</text>')

    legend_y = MARGIN + 16
    for s in series_list:
        x_arr = np.asarray(s.x, float)
        y_arr = np.asarray(s.y, float)
        if s.style == "points":
            for sx, sy in zip(x_arr, y_arr):
                cx, cy = px(sx), py(sy)
                parts.append(f'<path d="M {_fmt(cx - 3)} {_fmt(cy - 3)} L {_fmt(cx + 3)} '
                             f'{_fmt(cy + 3)} M {_fmt(cx - 3)} {_fmt(cy + 3)} L '
                             f'{_fmt(cx + 3)} {_fmt(cy - 3)}" stroke="{s.color}" '
                             'stroke-width="1.2" fill="none"/>')
        else:
            coords = " ".join(f"{_fmt(px(sx))},{_fmt(py(sy))}" for sx, sy in zip(x_arr, y_arr))
            dash = ' stroke-dasharray="6 4"' if s.style == "dashed" else ""
            parts.append(f'<polyline points="{coords}" fill="none" stroke="{s.color}" '
                         f'stroke-width="1.5"{dash}/>')
        if s.label:
            parts.append(f'<line x1="{WIDTH - MARGIN - 150}" y1="{legend_y - 4}" '
                         f'x2="{WIDTH - MARGIN - 125}" y2="{legend_y - 4}" '
                         f'stroke="{s.color}" stroke-width="2"/>')
            parts.append(f'<text x="{WIDTH - MARGIN - 118}" y="{legend_y}" '
                         f'font-family="sans-serif" font-size="12">{s.label}</text>')
            legend_y += 18
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def save(series_list: list[Series], path: str | Path, x_label: str, y_label: str,
         title: str = "") -> None:
    Path(path).write_text(render(series_list, x_label, y_label, title))
