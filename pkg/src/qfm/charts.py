"""Minimal SVG line charts for sweep tables.

Presentation only: one polyline per series, absolute error in percent on
the y axis.  Output is a deterministic string so rendered charts can be
compared byte for byte.
"""

from __future__ import annotations

import math
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .tables import SweepTable

__all__ = ["svg_line_chart", "write_svg"]

_PALETTE = (
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#9467bd",
    "#ff7f0e",
    "#8c564b",
    "#17becf",
    "#e377c2",
)

_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 64, 18, 34, 46


def svg_line_chart(
    table: SweepTable,
    x: str,
    series: str | None = None,
    y: str = "rel_error",
    log_x: bool = False,
    title: str = "",
    width: int = 720,
    height: int = 460,
) -> str:
    """Render |y| in percent against x, one polyline per distinct value
    of the ``series`` column (single polyline when ``series`` is None).
    Rows with missing cells are skipped.
    """
    xi = table.columns.index(x)
    yi = table.columns.index(y)
    si = table.columns.index(series) if series is not None else None

    groups: dict = {}
    for row in table.rows:
        if row[xi] is None or row[yi] is None:
            continue
        key = row[si] if si is not None else ""
        groups.setdefault(key, []).append((float(row[xi]), abs(float(row[yi])) * 100.0))
    if not groups:
        raise ValueError("nothing to plot: every row has missing cells")

    xs = [p[0] for pts in groups.values() for p in pts]
    ys = [p[1] for pts in groups.values() for p in pts]
    if log_x and min(xs) <= 0:
        raise ValueError("log x axis needs positive x values")

    def xt(v):
        return math.log10(v) if log_x else v

    x_lo, x_hi = min(xt(v) for v in xs), max(xt(v) for v in xs)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    y_hi = max(ys) * 1.08 or 1e-9
    plot_w = width - _MARGIN_L - _MARGIN_R
    plot_h = height - _MARGIN_T - _MARGIN_B

    def px(v):
        return _MARGIN_L + (xt(v) - x_lo) / (x_hi - x_lo) * plot_w

    def py(v):
        return _MARGIN_T + (1.0 - v / y_hi) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    if title:
        parts.append(
            f'<text x="{width / 2:.1f}" y="20" font-family="sans-serif" font-size="14" '
            f'text-anchor="middle">{escape(title)}</text>'
        )

    # axes
    x0, y0 = _MARGIN_L, _MARGIN_T + plot_h
    parts.append(
        f'<line x1="{x0}" y1="{y0}" x2="{x0 + plot_w}" y2="{y0}" stroke="black"/>'
    )
    parts.append(f'<line x1="{x0}" y1="{_MARGIN_T}" x2="{x0}" y2="{y0}" stroke="black"/>')

    for xv in _x_ticks(x_lo, x_hi, log_x):
        p = _MARGIN_L + (xt(xv) - x_lo) / (x_hi - x_lo) * plot_w
        parts.append(f'<line x1="{p:.2f}" y1="{y0}" x2="{p:.2f}" y2="{y0 + 5}" stroke="black"/>')
        parts.append(
            f'<text x="{p:.2f}" y="{y0 + 18}" font-family="sans-serif" font-size="11" '
            f'text-anchor="middle">{_fmt_tick(xv)}</text>'
        )
    for frac in np.linspace(0.0, 1.0, 6):
        yv = frac * y_hi
        p = py(yv)
        parts.append(f'<line x1="{x0 - 5}" y1="{p:.2f}" x2="{x0}" y2="{p:.2f}" stroke="black"/>')
        parts.append(
            f'<text x="{x0 - 8}" y="{p + 4:.2f}" font-family="sans-serif" font-size="11" '
            f'text-anchor="end">{_fmt_tick(yv)}</text>'
        )
    parts.append(
        f'<text x="{_MARGIN_L + plot_w / 2:.1f}" y="{height - 8}" font-family="sans-serif" '
        f'font-size="12" text-anchor="middle">{escape(x)}{" (log)" if log_x else ""}</text>'
    )
    parts.append(
        f'<text x="16" y="{_MARGIN_T + plot_h / 2:.1f}" font-family="sans-serif" font-size="12" '
        f'text-anchor="middle" transform="rotate(-90 16 {_MARGIN_T + plot_h / 2:.1f})">'
        f"|{escape(y)}| [%]</text>"
    )

    for idx, (key, pts) in enumerate(groups.items()):
        color = _PALETTE[idx % len(_PALETTE)]
        coords = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in pts)
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        if si is not None:
            ly = _MARGIN_T + 14 + 16 * idx
            lx = _MARGIN_L + plot_w - 120
            parts.append(
                f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" y2="{ly - 4}" '
                f'stroke="{color}" stroke-width="1.5"/>'
            )
            parts.append(
                f'<text x="{lx + 28}" y="{ly}" font-family="sans-serif" font-size="11">'
                f"{escape(series)}={_fmt_tick(key)}</text>"
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_svg(table: SweepTable, dest, **kwargs) -> None:
    text = svg_line_chart(table, **kwargs)
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        Path(dest).write_text(text, encoding="utf-8", newline="\n")


def _x_ticks(lo, hi, log_x):
    if log_x:
        return [10.0**e for e in range(math.ceil(lo - 1e-9), math.floor(hi + 1e-9) + 1)]
    return list(np.linspace(lo, hi, 6))


def _fmt_tick(v) -> str:
    try:
        v = float(v)
    except (TypeError, ValueError):
        return escape(str(v))
    if v != 0 and (abs(v) >= 1e4 or abs(v) < 1e-2):
        return f"{v:.1e}"
    return f"{v:g}"
