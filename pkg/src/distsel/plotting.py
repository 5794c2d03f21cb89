"""Deterministic SVG rendering of mirrored-density plots.

Hand-rolled SVG keeps the output byte-identical for identical specs: fixed
canvas, fixed float formatting, no timestamps. Values run along the y axis
(shared across series); each series is a mirror-symmetric silhouette around
its own vertical axis; decision boundaries are horizontal rules.
"""

from __future__ import annotations

import numpy as np

from .density import MdPlotSpec

_WIDTH = 840
_HEIGHT = 520
_MARGIN_L = 70
_MARGIN_R = 20
_MARGIN_T = 30
_MARGIN_B = 60

_SERIES_FILL = ("#4878a8", "#e49444", "#5cab68", "#b85c8a", "#8a76b4",
                "#c6b04b", "#6bb3c9", "#a85858")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _ticks(lo: float, hi: float, count: int = 6) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = np.linspace(lo, hi, count)
    return [float(t) for t in raw]


def render_svg(spec: MdPlotSpec, path=None) -> str:
    """Render a mirrored-density spec to SVG markup (optionally to a file)."""
    lo, hi = spec.value_range()
    pad = 0.05 * (hi - lo) if hi > lo else 1.0
    lo -= pad
    hi += pad

    plot_w = _WIDTH - _MARGIN_L - _MARGIN_R
    plot_h = _HEIGHT - _MARGIN_T - _MARGIN_B

    def y_of(value: float) -> float:
        return _MARGIN_T + plot_h * (hi - value) / (hi - lo)

    n_series = len(spec.series)
    slot_w = plot_w / max(n_series, 1)
    half = 0.42 * slot_w

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="#ffffff"/>',
    ]

    # value axis
    axis_x = _fmt(_MARGIN_L - 8)
    parts.append(f'<line x1="{axis_x}" y1="{_fmt(_MARGIN_T)}" x2="{axis_x}" '
                 f'y2="{_fmt(_MARGIN_T + plot_h)}" stroke="#333333" stroke-width="1"/>')
    for tick in _ticks(lo + pad, hi - pad):
        ty = y_of(tick)
        parts.append(f'<line x1="{_fmt(_MARGIN_L - 12)}" y1="{_fmt(ty)}" '
                     f'x2="{_fmt(_MARGIN_L - 8)}" y2="{_fmt(ty)}" stroke="#333333" stroke-width="1"/>')
        parts.append(f'<text x="{_fmt(_MARGIN_L - 16)}" y="{_fmt(ty + 4)}" '
                     f'font-family="sans-serif" font-size="11" text-anchor="end">{tick:.3g}</text>')

    for idx, series in enumerate(spec.series):
        cx = _MARGIN_L + (idx + 0.5) * slot_w
        dens = series.density.densities
        points = series.density.kernel_points
        peak = float(np.max(dens)) if np.max(dens) > 0 else 1.0
        right = [(cx + half * (d / peak), y_of(v)) for v, d in zip(points, dens)]
        left = [(2 * cx - x, y) for x, y in right]
        outline = right + left[::-1]
        path_d = "M " + " L ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in outline) + " Z"
        color = _SERIES_FILL[idx % len(_SERIES_FILL)]
        parts.append(f'<path d="{path_d}" fill="{color}" fill-opacity="0.55" '
                     f'stroke="{color}" stroke-width="1"/>')
        label = series.label
        parts.append(f'<text x="{_fmt(cx)}" y="{_fmt(_MARGIN_T + plot_h + 18)}" '
                     f'font-family="sans-serif" font-size="12" text-anchor="middle">{label}</text>')
        if series.dip is not None:
            parts.append(f'<text x="{_fmt(cx)}" y="{_fmt(_MARGIN_T + plot_h + 34)}" '
                         f'font-family="sans-serif" font-size="10" fill="#555555" '
                         f'text-anchor="middle">dip p = {series.dip.p_value:.3g}</text>')

    if spec.overlay_x is not None and n_series:
        cx = _MARGIN_L + 0.5 * slot_w
        dens = spec.overlay_density
        peak = float(np.max(dens)) if np.max(dens) > 0 else 1.0
        for sign in (1.0, -1.0):
            pts = " L ".join(f"{_fmt(cx + sign * half * (d / peak))},{_fmt(y_of(v))}"
                             for v, d in zip(spec.overlay_x, dens))
            parts.append(f'<path d="M {pts}" fill="none" stroke="#222222" '
                         f'stroke-width="1.2" stroke-dasharray="5,3"/>')

    for b in spec.boundaries:
        by = y_of(b)
        parts.append(f'<line x1="{_fmt(_MARGIN_L)}" y1="{_fmt(by)}" '
                     f'x2="{_fmt(_MARGIN_L + plot_w)}" y2="{_fmt(by)}" '
                     f'stroke="#cc2222" stroke-width="1.5" stroke-dasharray="8,4"/>')
        parts.append(f'<text x="{_fmt(_MARGIN_L + plot_w - 4)}" y="{_fmt(by - 5)}" '
                     f'font-family="sans-serif" font-size="11" fill="#cc2222" '
                     f'text-anchor="end">boundary = {b:.4g}</text>')

    parts.append("</svg>")
    markup = "\n".join(parts) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(markup)
    return markup
