"""Minimal static SVG emission for cluster overlays."""

from __future__ import annotations

import numpy as np


def _viewbox(point_sets, pad_frac=0.08):
    pts = np.vstack(point_sets)
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    span = np.maximum(hi - lo, 1e-9)
    lo = lo - pad_frac * span
    hi = hi + pad_frac * span
    return lo, hi


def render_clusters_svg(path, clusters_styles, marker_points=None, size=640):
    """Write an overlay figure of one or more clusters.

    clusters_styles : list of (cluster, stroke, width, dash) tuples.
    marker_points : optional (M, 2) array drawn as filled black disks
        (singular points).
    """
    sets = [c.all_points() for c, *_ in clusters_styles]
    if marker_points is not None and len(marker_points):
        sets.append(np.atleast_2d(marker_points))
    lo, hi = _viewbox(sets)
    span = hi - lo
    scale = size / max(span)
    w = span[0] * scale
    h = span[1] * scale

    def to_px(p):
        return (p[:, 0] - lo[0]) * scale, (hi[1] - p[:, 1]) * scale

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.1f}" '
        f'height="{h:.1f}" viewBox="0 0 {w:.1f} {h:.1f}">',
        f'<rect width="{w:.1f}" height="{h:.1f}" fill="white"/>',
    ]
    for c, stroke, width, dash in clusters_styles:
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        for iface in c.interfaces:
            pts = iface.curve.points
            if iface.curve.closed:
                pts = np.vstack([pts, pts[:1]])
            xs, ys = to_px(pts)
            d = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
            lines.append(
                f'<polyline points="{d}" fill="none" stroke="{stroke}" '
                f'stroke-width="{width}"{dash_attr}/>'
            )
    if marker_points is not None and len(marker_points):
        xs, ys = to_px(np.atleast_2d(marker_points))
        r = max(2.5, 0.006 * size)
        for x, y in zip(xs, ys):
            lines.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{r:.1f}" fill="black"/>')
    lines.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
