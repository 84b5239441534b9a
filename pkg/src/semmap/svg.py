"""Deterministic SVG rendering of semantic maps.

No raster dependencies: scatter points colored by means, contour
overlays per probability level, optional NULL-count heat layer. Element
order is fixed and coordinates print with three decimals so identical
inputs yield identical bytes.
"""

from __future__ import annotations

import numpy as np

__all__ = ["render_map"]

# color-blind-safe cycle (Okabe-Ito), NULL always grey
PALETTE = (
    "#0072b2", "#d55e00", "#009e73", "#cc79a7",
    "#e69f00", "#56b4e9", "#f0e442", "#000000",
)
NULL_COLOR = "#999999"

WIDTH = 720
HEIGHT = 560
MARGIN = 40


def _scale(points: np.ndarray):
    x0, y0 = points.min(axis=0)
    x1, y1 = points.max(axis=0)
    spanx = (x1 - x0) or 1.0
    spany = (y1 - y0) or 1.0

    def to_px(p):
        x = MARGIN + (p[0] - x0) / spanx * (WIDTH - 2 * MARGIN)
        # svg y grows downward
        y = HEIGHT - MARGIN - (p[1] - y0) / spany * (HEIGHT - 2 * MARGIN)
        return x, y

    return to_px


def _fmt(v: float) -> str:
    return f"{v:.3f}"


def render_map(points, labels, contours_by_means=None, heat=None,
               title: str = "", comment: str = "") -> str:
    """Build the SVG document for one doculect's map.

    ``labels`` may contain None for NULL; ``contours_by_means`` maps a
    means label to {level: [polygons]}; ``heat`` (per-point counts)
    switches the scatter to a warm/cold fill by count.
    """
    pts = np.asarray(points, dtype=float)
    labels = ["NULL" if lab is None else lab for lab in labels]
    to_px = _scale(pts)
    means_order = sorted(set(labels))
    color_of = {}
    ci = 0
    for m in means_order:
        if m == "NULL":
            color_of[m] = NULL_COLOR
        else:
            color_of[m] = PALETTE[ci % len(PALETTE)]
            ci += 1

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
    ]
    if comment:
        out.append(f"<!-- {comment} -->")
    out.append(f'<rect width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>')
    if title:
        out.append(
            f'<text x="{MARGIN}" y="24" font-family="sans-serif" '
            f'font-size="16">{title}</text>'
        )

    if heat is not None:
        top = max(max(heat), 1)
        for p, h in zip(pts, heat):
            x, y = to_px(p)
            # warm red for many NULLs, cold blue for few
            frac = h / top
            r = int(40 + 215 * frac)
            b = int(255 - 215 * frac)
            out.append(
                f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="3.0" '
                f'fill="rgb({r},60,{b})"/>'
            )
    else:
        for p, lab in zip(pts, labels):
            x, y = to_px(p)
            out.append(
                f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="3.0" '
                f'fill="{color_of[lab]}" fill-opacity="0.75"/>'
            )

    if contours_by_means:
        for m in sorted(contours_by_means):
            color = color_of.get(m, NULL_COLOR if m == "NULL" else PALETTE[0])
            level_map = contours_by_means[m]
            for level in sorted(level_map, reverse=True):
                for poly in level_map[level]:
                    coords = " ".join(
                        f"{_fmt(x)},{_fmt(y)}" for x, y in (to_px(p) for p in poly)
                    )
                    out.append(
                        f'<polygon points="{coords}" fill="none" '
                        f'stroke="{color}" stroke-width="1.5" '
                        f'stroke-opacity="{_fmt(0.4 + 0.2 * level)}">'
                        f'<title>{m} @ {level:g}</title></polygon>'
                    )

    # legend
    ly = MARGIN
    for m in means_order:
        out.append(
            f'<rect x="{WIDTH - 150}" y="{ly}" width="12" height="12" '
            f'fill="{color_of[m]}"/>'
        )
        out.append(
            f'<text x="{WIDTH - 132}" y="{ly + 11}" font-family="sans-serif" '
            f'font-size="12">{m}</text>'
        )
        ly += 18
    out.append("</svg>")
    return "\n".join(out) + "\n"
