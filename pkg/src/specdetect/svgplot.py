"""Minimal standalone SVG line charts (no plotting dependency).

Each series draws one polyline for its mean curve plus, optionally, a
shaded polygon band.  The y axis is log10 by default since radial power
profiles span many decades; values are floored at 1e-12 before taking
logs.
"""

import math
from xml.sax.saxutils import escape

import numpy as np

FLOOR = 1e-12

__all__ = ["line_chart"]


def _transform(values, log_y):
    v = np.maximum(np.asarray(values, dtype=float), FLOOR)
    return np.log10(v) if log_y else v


def line_chart(series, title="", x_label="bin", y_label="power",
               log_y=True, width=800, height=480) -> str:
    """Render series to an SVG document string.

    series: list of dicts with keys name, mean (1D array), and optional
    band (lo, hi arrays) and color.
    """
    if not series:
        raise ValueError("no series to plot")
    margin_l, margin_r, margin_t, margin_b = 64, 16, 36, 44
    plot_w = width - margin_l - margin_r
    plot_h = height - margin_t - margin_b

    n = max(len(s["mean"]) for s in series)
    ys = []
    for s in series:
        ys.append(_transform(s["mean"], log_y))
        if s.get("band") is not None:
            lo, hi = s["band"]
            ys.append(_transform(lo, log_y))
            ys.append(_transform(hi, log_y))
    if any(not math.isfinite(v) for a in ys for v in np.ravel(a)):
        raise ValueError("non-finite values in chart data")
    ymin = min(float(a.min()) for a in ys)
    ymax = max(float(a.max()) for a in ys)
    if ymax - ymin < 1e-9:
        ymax = ymin + 1.0

    def px(i):
        return margin_l + (plot_w * i / max(n - 1, 1))

    def py(v):
        return margin_t + plot_h * (1.0 - (v - ymin) / (ymax - ymin))

    def pts(values):
        return " ".join(f"{px(i):.2f},{py(v):.2f}" for i, v in enumerate(values))

    palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    if title:
        parts.append(
            f'<text x="{width / 2:.0f}" y="22" text-anchor="middle" '
            f'font-family="sans-serif" font-size="15">{escape(title)}</text>'
        )

    # axes
    x0, y0 = margin_l, margin_t + plot_h
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x0 + plot_w}" y2="{y0}" stroke="black"/>')
    parts.append(f'<line x1="{x0}" y1="{margin_t}" x2="{x0}" y2="{y0}" stroke="black"/>')
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        xi = (n - 1) * frac
        parts.append(
            f'<text x="{px(xi):.1f}" y="{y0 + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{xi:.0f}</text>'
        )
    n_ticks = 5
    for t in range(n_ticks):
        v = ymin + (ymax - ymin) * t / (n_ticks - 1)
        label = f"1e{v:.1f}" if log_y else f"{v:.3g}"
        parts.append(
            f'<text x="{x0 - 6}" y="{py(v) + 4:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{escape(label)}</text>'
        )
    parts.append(
        f'<text x="{margin_l + plot_w / 2:.0f}" y="{height - 8}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{escape(x_label)}</text>'
    )
    label = escape(y_label + (" (log10)" if log_y else ""))
    parts.append(
        f'<text x="14" y="{margin_t + plot_h / 2:.0f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 14 {margin_t + plot_h / 2:.0f})">{label}</text>'
    )

    for k, s in enumerate(series):
        color = s.get("color") or palette[k % len(palette)]
        if s.get("band") is not None:
            lo = _transform(s["band"][0], log_y)
            hi = _transform(s["band"][1], log_y)
            ring = [f"{px(i):.2f},{py(v):.2f}" for i, v in enumerate(hi)]
            ring += [f"{px(i):.2f},{py(v):.2f}" for i, v in reversed(list(enumerate(lo)))]
            parts.append(
                f'<polygon points="{" ".join(ring)}" fill="{color}" '
                f'fill-opacity="0.2" stroke="none"/>'
            )
        parts.append(
            f'<polyline points="{pts(_transform(s["mean"], log_y))}" '
            f'fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        ly = margin_t + 14 + 16 * k
        parts.append(
            f'<rect x="{x0 + plot_w - 130}" y="{ly - 9}" width="12" height="3" fill="{color}"/>'
        )
        parts.append(
            f'<text x="{x0 + plot_w - 112}" y="{ly - 4}" font-family="sans-serif" '
            f'font-size="12">{escape(str(s["name"]))}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts)
