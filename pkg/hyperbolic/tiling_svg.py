"""
SVG rendering of fundamental-domain tilings in the Poincaré disk.
Sides are drawn as arcs of circles orthogonal to the unit circle; tiles are
colored by the length of their word.
"""

import logging

import numpy as np

from hyperbolic.ballenum import enumerate_word_ball
from hyperbolic.geometry import apply

logger = logging.getLogger(__name__)

SIZE = 600
PALETTE = ("#1f4e79", "#2e75b6", "#9dc3e6", "#c5e0b4", "#ffe699", "#f4b183", "#c55a11", "#7f6000")
STYLES = ("wordlength", "outline")


def _fmt(x):
    return f"{x:.6f}"


def _geodesic_arc(p, q):
    """SVG path segment from the current point p to q along their geodesic."""
    cross = p.real * q.imag - p.imag * q.real
    if abs(cross) < 1e-12:
        return f"L {_fmt(q.real)} {_fmt(q.imag)}"
    # Circle through p, q and the inversion of p in the unit circle.
    p_star = p / abs(p) ** 2
    ax, ay, bx, by, cx, cy = p.real, p.imag, q.real, q.imag, p_star.real, p_star.imag
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    ux = ((ax**2 + ay**2) * (by - cy) + (bx**2 + by**2) * (cy - ay) + (cx**2 + cy**2) * (ay - by)) / d
    uy = ((ax**2 + ay**2) * (cx - bx) + (bx**2 + by**2) * (ax - cx) + (cx**2 + cy**2) * (bx - ax)) / d
    center = complex(ux, uy)
    radius = abs(p - center)
    chord = q - p
    left = (np.conj(chord) * (center - p)).imag > 0
    sweep = 1 if left else 0
    return f"A {_fmt(radius)} {_fmt(radius)} 0 0 {sweep} {_fmt(q.real)} {_fmt(q.imag)}"


def polygon_path(vertices):
    v = [complex(z) for z in vertices]
    parts = [f"M {_fmt(v[0].real)} {_fmt(v[0].imag)}"]
    for k in range(len(v)):
        parts.append(_geodesic_arc(v[k], v[(k + 1) % len(v)]))
    parts.append("Z")
    return " ".join(parts)


def render_tiling(group, depth, style="wordlength", markers=True, budget=None) -> str:
    """
    SVG document with the tiles of all words of length <= depth. The
    distinguished generator's orbit point is marked when `markers` is set.
    """
    if style not in STYLES:
        raise ValueError(f"unknown style {style!r}; choose from {STYLES}")
    tiles = enumerate_word_ball(group, depth, budget)
    order = np.argsort(tiles.word_lengths, kind="stable")

    body = ['<circle cx="0" cy="0" r="1" fill="white" stroke="black" stroke-width="0.004"/>']
    for i in order:
        corners = apply(tiles.isometry(int(i)), group.polygon.vertices)
        length = int(tiles.word_lengths[i])
        fill = PALETTE[length % len(PALETTE)] if style == "wordlength" else "none"
        word = "".join(tiles.words[i]) or "e"
        body.append(
            f'<path d="{polygon_path(corners)}" fill="{fill}" fill-opacity="0.55" '
            f'stroke="black" stroke-width="0.002" data-word="{word}"/>'
        )
    if markers:
        point = group.generators[group.distinguished_label].orbit_point
        body.append(
            f'<circle cx="{_fmt(point.real)}" cy="{_fmt(point.imag)}" r="0.008" fill="red" '
            f'data-label="{group.distinguished_label}(0)"/>'
        )
        body.append('<circle cx="0" cy="0" r="0.006" fill="black"/>')

    logger.info("rendered %d tiles to depth %d", len(tiles), depth)
    return "\n".join([
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="-1.05 -1.05 2.1 2.1">',
        '<g transform="scale(1,-1)">',
        *body,
        "</g>",
        "</svg>",
        "",
    ])
