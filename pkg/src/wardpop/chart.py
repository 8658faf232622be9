"""Static SVG bar charts.

Output is byte-deterministic: fixed layout constants, no ids, no timestamps,
shortest round-trip number formatting.
"""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

from ._fmt import fmt_num
from .errors import EmptyInput, LengthMismatch

PLOT_HEIGHT = 300.0
BAR_WIDTH = 24.0
BAR_GAP = 8.0
MARGIN_LEFT = 70.0
MARGIN_TOP = 40.0
LABEL_SPACE = 150.0
MARGIN_RIGHT = 20.0
BAR_FILL = "#4c72b0"


def bar_heights(values, plot_height=PLOT_HEIGHT):
    top = max(values)
    if top <= 0:
        return [0.0 for _ in values]
    return [plot_height * v / top for v in values]


def render_bar_chart(labels, values, title="") -> str:
    labels = [str(l) for l in labels]
    values = [float(v) for v in values]
    if not values:
        raise EmptyInput("bar chart needs at least one value")
    if len(labels) != len(values):
        raise LengthMismatch(f"{len(labels)} labels for {len(values)} values")
    if any(not math.isfinite(v) or v < 0 for v in values):
        raise ValueError("bar values must be finite and non-negative")

    heights = bar_heights(values)
    n = len(values)
    width = MARGIN_LEFT + n * (BAR_WIDTH + BAR_GAP) + MARGIN_RIGHT
    height = MARGIN_TOP + PLOT_HEIGHT + LABEL_SPACE
    base = MARGIN_TOP + PLOT_HEIGHT
    f = fmt_num

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{f(width)}" height="{f(height)}" '
        f'viewBox="0 0 {f(width)} {f(height)}" font-family="sans-serif" font-size="11">',
        f'<text class="title" x="{f(width / 2)}" y="{f(MARGIN_TOP / 2)}" '
        f'text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<line class="axis" x1="{f(MARGIN_LEFT)}" y1="{f(MARGIN_TOP)}" x2="{f(MARGIN_LEFT)}" '
        f'y2="{f(base)}" stroke="black"/>',
        f'<line class="axis" x1="{f(MARGIN_LEFT)}" y1="{f(base)}" x2="{f(width - MARGIN_RIGHT)}" '
        f'y2="{f(base)}" stroke="black"/>',
    ]
    top = max(values)
    for frac in (0.0, 0.5, 1.0):
        y = base - frac * PLOT_HEIGHT
        out.append(
            f'<text class="tick" x="{f(MARGIN_LEFT - 6)}" y="{f(y)}" text-anchor="end" '
            f'dominant-baseline="middle">{escape(f"{frac * top:.6g}")}</text>'
        )
    for i, (label, v, h) in enumerate(zip(labels, values, heights)):
        x = MARGIN_LEFT + BAR_GAP / 2 + i * (BAR_WIDTH + BAR_GAP)
        cx = x + BAR_WIDTH / 2
        out.append(
            f'<rect class="bar" x="{f(x)}" y="{f(base - h)}" width="{f(BAR_WIDTH)}" '
            f'height="{f(h)}" fill="{BAR_FILL}" data-value="{f(v)}" '
            f'data-label="{escape(label, {chr(34): "&quot;"})}"/>'
        )
        ly = base + 10
        out.append(
            f'<text class="label" x="{f(cx)}" y="{f(ly)}" text-anchor="end" '
            f'transform="rotate(-60 {f(cx)} {f(ly)})">{escape(label)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
