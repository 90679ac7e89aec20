"""Minimal SVG snapshot writer: overlaid time slices of evolving boundaries."""

from __future__ import annotations

import numpy as np


def _color(i, n):
    # dark blue -> light orange ramp across frames
    t = i / max(n - 1, 1)
    r = int(40 + 205 * t)
    g = int(60 + 120 * t)
    b = int(160 - 120 * t)
    return f"#{r:02x}{g:02x}{b:02x}"


def write_svg(path, frames, size: int = 640, stroke_width: float = 0.004):
    """Write overlaid polygon frames. frames: list of lists of (k, 2) arrays."""
    pts = [np.asarray(p, dtype=float) for frame in frames for p in frame if len(p)]
    if not pts:
        raise ValueError("nothing to draw")
    allp = np.concatenate(pts, axis=0)
    lo = allp.min(axis=0)
    hi = allp.max(axis=0)
    span = float(max(hi[0] - lo[0], hi[1] - lo[1], 1e-9))
    pad = 0.05 * span
    lo = lo - pad
    span = span + 2 * pad

    def sxy(p):
        x = (p[:, 0] - lo[0]) / span * size
        y = size - (p[:, 1] - lo[1]) / span * size
        return x, y

    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" '
             f'height="{size}" viewBox="0 0 {size} {size}">',
             f'<rect width="{size}" height="{size}" fill="white"/>']
    n = len(frames)
    sw = stroke_width * size
    for i, frame in enumerate(frames):
        col = _color(i, n)
        for poly in frame:
            poly = np.asarray(poly, dtype=float)
            if len(poly) < 2:
                continue
            x, y = sxy(poly)
            coords = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(x, y))
            lines.append(f'<polygon points="{coords}" fill="none" '
                         f'stroke="{col}" stroke-width="{sw:.2f}"/>')
    lines.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
