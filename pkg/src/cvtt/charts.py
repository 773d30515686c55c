"""Deterministic SVG line charts for performance-over-time series.

The renderer is plain string assembly with fixed float formatting, so the
same input always produces byte-identical output. The y axis is pinned to
[0, 1] to keep charts comparable across runs.
"""

from __future__ import annotations

from dataclasses import dataclass

PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)

_WIDTH, _HEIGHT = 840, 480
_PLOT = (70, 50, 600, 430)  # left, top, right, bottom


@dataclass(frozen=True)
class ChartSeries:
    label: str
    points: tuple  # (fold_index, value) pairs


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def render_line_chart(series, *, title: str = "", x_label: str = "fold") -> str:
    """One polyline plus markers per series, legend on the right."""
    series = list(series)
    if not series or all(not s.points for s in series):
        raise ValueError("no series to plot")
    left, top, right, bottom = _PLOT
    xs = sorted({x for s in series for x, _ in s.points})
    x_min, x_max = xs[0], xs[-1]
    x_span = max(x_max - x_min, 1)

    def px(x):
        return left + (x - x_min) / x_span * (right - left)

    def py(y):
        return bottom - min(max(y, 0.0), 1.0) * (bottom - top)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
    ]
    if title:
        out.append(
            f'<text x="{(left + right) // 2}" y="28" text-anchor="middle" '
            f'font-family="sans-serif" font-size="16">{title}</text>'
        )
    # frame and y grid, fixed 0..1
    out.append(
        f'<rect x="{left}" y="{top}" width="{right - left}" height="{bottom - top}" '
        f'fill="none" stroke="#333333" stroke-width="1"/>'
    )
    for tick in range(0, 11, 2):
        y = tick / 10.0
        out.append(
            f'<line x1="{left}" y1="{_fmt(py(y))}" x2="{right}" y2="{_fmt(py(y))}" '
            f'stroke="#dddddd" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{left - 8}" y="{_fmt(py(y) + 4)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{_fmt(y)}</text>'
        )
    step = max(1, (x_max - x_min) // 12 + (1 if (x_max - x_min) % 12 else 0))
    for x in range(x_min, x_max + 1, step):
        out.append(
            f'<text x="{_fmt(px(x))}" y="{bottom + 16}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{x}</text>'
        )
    out.append(
        f'<text x="{(left + right) // 2}" y="{bottom + 34}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{x_label}</text>'
    )

    legend_x = right + 16
    for idx, s in enumerate(series):
        color = PALETTE[idx % len(PALETTE)]
        pts = sorted(s.points)
        coords = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in pts)
        if len(pts) > 1:
            out.append(
                f'<polyline points="{coords}" fill="none" stroke="{color}" '
                f'stroke-width="1.5"/>'
            )
        for x, y in pts:
            out.append(
                f'<circle cx="{_fmt(px(x))}" cy="{_fmt(py(y))}" r="2.5" fill="{color}"/>'
            )
        ly = top + 14 + idx * 18
        out.append(
            f'<line x1="{legend_x}" y1="{ly - 4}" x2="{legend_x + 20}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        out.append(
            f'<text x="{legend_x + 26}" y="{ly}" font-family="sans-serif" '
            f'font-size="11">{s.label}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
