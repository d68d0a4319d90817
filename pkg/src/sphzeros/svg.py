"""Minimal hand-written SVG scatter plots (byte-stable for fixed input)."""

import math

import numpy as np

PANEL = 400
MARGIN = 20
RADIUS = 3


def _f(x):
    return f"{x:.3f}"


def _header(width, height):
    return [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">',
            f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>']


def _plane_panel(finite, x0, half_width):
    """Stereographic plane, window ``[-half_width, half_width]^2``; unit circle drawn."""
    c = x0 + PANEL / 2
    scale = (PANEL / 2 - MARGIN) / half_width
    out = [f'<g id="plane">',
           f'<rect x="{_f(x0 + MARGIN)}" y="{_f(MARGIN)}" width="{_f(PANEL - 2 * MARGIN)}" '
           f'height="{_f(PANEL - 2 * MARGIN)}" fill="none" stroke="#999"/>',
           f'<circle cx="{_f(c)}" cy="{_f(PANEL / 2)}" r="{_f(scale)}" fill="none" '
           f'stroke="#999" stroke-dasharray="4 3"/>']
    outside = 0
    for z in finite:
        if abs(z.real) > half_width or abs(z.imag) > half_width:
            outside += 1
            continue
        out.append(f'<circle cx="{_f(c + scale * z.real)}" cy="{_f(PANEL / 2 - scale * z.imag)}" '
                   f'r="{RADIUS}" fill="black"/>')
    out.append(f'<text x="{_f(x0 + MARGIN)}" y="{_f(PANEL - 4)}" font-size="12">'
               f'plane |Re|,|Im| &lt;= {half_width:g}; {outside} outside</text>')
    out.append("</g>")
    return out


def _sphere_panel(points, x0):
    """Orthographic view from +x: front hemisphere filled, back hollow."""
    c = x0 + PANEL / 2
    R = PANEL / 2 - MARGIN
    out = [f'<g id="sphere">',
           f'<circle cx="{_f(c)}" cy="{_f(PANEL / 2)}" r="{_f(R)}" fill="none" stroke="#999"/>']
    for x, y, z in points:
        fill = "black" if x >= 0 else "none"
        out.append(f'<circle cx="{_f(c + R * y)}" cy="{_f(PANEL / 2 - R * z)}" r="{RADIUS}" '
                   f'fill="{fill}" stroke="black"/>')
    out.append("</g>")
    return out


def scatter_svg(finite, points, view="both", half_width=3.0):
    finite = np.asarray(finite, dtype=np.complex128)
    panels = {"plane": 1, "sphere": 1, "both": 2}[view]
    lines = _header(PANEL * panels, PANEL)
    x0 = 0
    if view in ("plane", "both"):
        lines += _plane_panel(finite, x0, half_width)
        x0 += PANEL
    if view in ("sphere", "both"):
        lines += _sphere_panel(points, x0)
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
