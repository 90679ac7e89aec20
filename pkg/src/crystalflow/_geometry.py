"""Small planar-geometry helpers used across modules (internal)."""

from __future__ import annotations

import numpy as np


def rot90(v):
    """Rotate vectors by +90 degrees: (x, y) -> (-y, x). Works on (..., 2) arrays."""
    v = np.asarray(v, dtype=float)
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


def polygon_signed_area(pts) -> float:
    """Shoelace signed area of a closed polygon given by its vertices (n, 2)."""
    p = np.asarray(pts, dtype=float)
    x, y = p[:, 0], p[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def ensure_ccw(pts):
    """Return vertices ordered counterclockwise (reversing if needed)."""
    p = np.asarray(pts, dtype=float)
    if polygon_signed_area(p) < 0.0:
        return p[::-1].copy()
    return p.copy()


def wrap_angle(theta):
    """Wrap angle(s) to (-pi, pi]."""
    t = np.asarray(theta, dtype=float)
    out = (t + np.pi) % (2.0 * np.pi) - np.pi
    out = np.where(np.isclose(out, -np.pi), np.pi, out)
    if out.ndim == 0:
        return float(out)
    return out


def point_in_polygon(points, poly, tol: float = 0.0):
    """Even-odd membership test, vectorized over query points.

    points: (..., 2); poly: (n, 2) simple polygon (any orientation).
    With tol > 0, points within distance tol of the boundary count as inside.
    Returns a boolean array of shape points.shape[:-1].
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    shp = pts.shape[:-1]
    pts = pts.reshape(-1, 2)
    poly = np.asarray(poly, dtype=float)
    a = poly
    b = np.roll(poly, -1, axis=0)

    x, y = pts[:, 0][:, None], pts[:, 1][:, None]
    ax, ay = a[:, 0][None, :], a[:, 1][None, :]
    bx, by = b[:, 0][None, :], b[:, 1][None, :]

    # crossing-number parity
    cond = (ay <= y) != (by <= y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = ax + (y - ay) * (bx - ax) / np.where(by == ay, 1.0, by - ay)
    crossing = cond & (x < xint)
    inside = np.sum(crossing, axis=1) % 2 == 1

    if tol > 0.0:
        d = distance_to_segments(pts, a, b)
        inside = inside | (d <= tol)
    return inside.reshape(shp) if shp else bool(inside[0])


def distance_to_segments(pts, a, b):
    """Euclidean distance from each point in pts (k, 2) to the nearest of the
    segments a[i]->b[i]. Returns (k,)."""
    pts = np.asarray(pts, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    e = b - a  # (n, 2)
    ee = np.einsum("ij,ij->i", e, e)
    ee = np.where(ee == 0.0, 1.0, ee)
    w = pts[:, None, :] - a[None, :, :]  # (k, n, 2)
    t = np.clip(np.einsum("kni,ni->kn", w, e) / ee[None, :], 0.0, 1.0)
    proj = a[None, :, :] + t[..., None] * e[None, :, :]
    d = np.linalg.norm(pts[:, None, :] - proj, axis=-1)
    return d.min(axis=1)


def segments_properly_intersect(p1, p2, q1, q2, eps: float = 1e-12) -> bool:
    """True if open segments p1-p2 and q1-q2 cross at an interior point."""
    d1 = np.cross(q2 - q1, p1 - q1)
    d2 = np.cross(q2 - q1, p2 - q1)
    d3 = np.cross(p2 - p1, q1 - p1)
    d4 = np.cross(p2 - p1, q2 - p1)
    return bool(((d1 > eps) != (d2 > eps)) and ((d3 > eps) != (d4 > eps))
                and (abs(d1) > eps or abs(d2) > eps)
                and (abs(d3) > eps or abs(d4) > eps))


def polygon_is_simple(pts, eps: float = 1e-12) -> bool:
    """Check a closed polygon for self-intersections (O(n^2), small n)."""
    p = np.asarray(pts, dtype=float)
    n = len(p)
    if n < 3:
        return False
    for i in range(n):
        a1, a2 = p[i], p[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            b1, b2 = p[j], p[(j + 1) % n]
            if segments_properly_intersect(a1, a2, b1, b2, eps):
                return False
    return True


def polygons_cross(poly_a, poly_b, eps: float = 1e-12) -> bool:
    """True if any boundary edge of poly_a properly crosses one of poly_b."""
    pa = np.asarray(poly_a, dtype=float)
    pb = np.asarray(poly_b, dtype=float)
    na, nb = len(pa), len(pb)
    for i in range(na):
        a1, a2 = pa[i], pa[(i + 1) % na]
        for j in range(nb):
            b1, b2 = pb[j], pb[(j + 1) % nb]
            if segments_properly_intersect(a1, a2, b1, b2, eps):
                return True
    return False


def convex_hull(points):
    """Andrew monotone chain. Returns hull vertices in CCW order, (k, 2)."""
    pts = np.unique(np.asarray(points, dtype=float), axis=0)
    if len(pts) <= 2:
        return pts
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]

    def half(iterable):
        out = []
        for p in iterable:
            while len(out) >= 2 and np.cross(out[-1] - out[-2], p - out[-2]) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(pts[::-1])
    hull = np.array(lower[:-1] + upper[:-1])
    return hull


def hausdorff_distance(pts_a, pts_b) -> float:
    """Symmetric Hausdorff distance between two polygonal boundaries,
    sampled on their vertices and edges (edges of the other set are honored
    via point-to-segment distances)."""
    a = np.asarray(pts_a, dtype=float)
    b = np.asarray(pts_b, dtype=float)
    da = distance_to_segments(a, b, np.roll(b, -1, axis=0)).max()
    db = distance_to_segments(b, a, np.roll(a, -1, axis=0)).max()
    return float(max(da, db))
