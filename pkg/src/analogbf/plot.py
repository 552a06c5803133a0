"""Minimal self-contained SVG line plots of dB patterns versus angle."""

from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 400
MARGIN = dict(left=60, right=20, top=30, bottom=50)
COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]


def _ticks(lo, hi, step):
    first = np.ceil(lo / step) * step
    return np.arange(first, hi + step / 2, step)


def db_plot(x_deg, curves, title="", floor=-80.0, ylabel="Magnitude (dB)"):
    """Render curves of dB values against angle in degrees.

    Parameters
    ----------
    x_deg : array_like
        Shared abscissa in degrees.
    curves : list of (label, values_db, dashed)
    title : str
    floor : float
        Lower end of the y axis.

    Returns
    -------
    str
        SVG document.
    """
    x = np.asarray(x_deg, dtype=float)
    x0, x1 = -90.0, 90.0
    y0, y1 = floor, 0.0
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(v):
        return MARGIN["left"] + (v - x0) / (x1 - x0) * pw

    def py(v):
        return MARGIN["top"] + (y1 - np.clip(v, y0, y1)) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" '
        'font-family="sans-serif" font-size="11">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    for t in _ticks(x0, x1, 30):
        out.append(f'<line x1="{px(t):.2f}" y1="{MARGIN["top"]}" '
                   f'x2="{px(t):.2f}" y2="{MARGIN["top"] + ph}" '
                   'stroke="#ddd"/>')
        out.append(f'<text x="{px(t):.2f}" y="{MARGIN["top"] + ph + 15}" '
                   f'text-anchor="middle">{t:g}</text>')
    for t in _ticks(y0, y1, 10):
        out.append(f'<line x1="{MARGIN["left"]}" y1="{py(t):.2f}" '
                   f'x2="{MARGIN["left"] + pw}" y2="{py(t):.2f}" '
                   'stroke="#ddd"/>')
        out.append(f'<text x="{MARGIN["left"] - 6}" y="{py(t) + 4:.2f}" '
                   f'text-anchor="end">{t:g}</text>')
    out.append(f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" '
               f'width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    for i, (label, vals, dashed) in enumerate(curves):
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}"
                       for a, b in zip(x, np.asarray(vals, dtype=float)))
        dash = ' stroke-dasharray="6,4"' if dashed else ""
        color = COLORS[i % len(COLORS)]
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                   f'stroke-width="1.5"{dash}/>')
        ly = MARGIN["top"] + 15 + 15 * i
        lx = MARGIN["left"] + pw - 150
        out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 25}" '
                   f'y2="{ly - 4}" stroke="{color}" stroke-width="1.5"'
                   f'{dash}/>')
        out.append(f'<text x="{lx + 30}" y="{ly}">{escape(label)}</text>')
    out.append(f'<text x="{MARGIN["left"] + pw / 2}" y="{HEIGHT - 12}" '
               'text-anchor="middle">Angle (deg)</text>')
    out.append(f'<text x="15" y="{MARGIN["top"] + ph / 2}" '
               f'text-anchor="middle" transform="rotate(-90 15 '
               f'{MARGIN["top"] + ph / 2})">{escape(ylabel)}</text>')
    if title:
        out.append(f'<text x="{WIDTH / 2}" y="18" text-anchor="middle" '
                   f'font-size="13">{escape(title)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
