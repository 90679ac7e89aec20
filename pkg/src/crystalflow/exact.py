"""Closed-form reference solutions used as oracles by tests and the CLI."""

from __future__ import annotations

import math

import numpy as np

from .errors import EmptyFacetError, PastExtinctionError

# breaking example geometry: an L-shaped facet that splits into two rectangles
BREAKING_A = ((-1.0, 0.0), (-1.0, 1.0))   # [-1, 0] x [-1, 1]
BREAKING_B = ((0.0, 1.0), (0.5, 1.0))     # [0, 1] x [1/2, 1]
BREAKING_SPEED_A = 3.0
BREAKING_SPEED_B = 4.0


def wulff_extinction_time(r0: float, c: float = 1.0) -> float:
    """Extinction time of the homothetic Wulff solution in the plane."""
    if r0 <= 0 or c <= 0:
        raise ValueError("r0 and c must be positive")
    return r0 * r0 / (2.0 * c)


def wulff_radius(r0: float, c: float, t: float) -> float:
    """Scale factor of the shrinking Wulff polygon at time t under V = c sigma(n) kappa.

    R(t) = sqrt(r0^2 - 2 c t), valid up to the extinction time r0^2 / (2 c).
    """
    t_star = wulff_extinction_time(r0, c)
    if t < 0 or t > t_star * (1 + 1e-12):
        raise PastExtinctionError(f"t={t} outside [0, {t_star}]")
    return math.sqrt(max(r0 * r0 - 2.0 * c * t, 0.0))


def rectangle_extinction_time(a: float, b: float) -> float:
    if a <= 0 or b <= 0:
        raise ValueError("rectangle half-widths must be positive")
    return a * b / 2.0


def rectangle_scale(a: float, b: float, t: float) -> float:
    """Scale factor R(t) = sqrt(1 - 2 t / (a b)) of the homothetic rectangle
    (-a, a) x (-b, b) under the square anisotropy (V = kappa and V = sigma kappa
    coincide there)."""
    t_star = rectangle_extinction_time(a, b)
    if t < 0 or t > t_star * (1 + 1e-12):
        raise PastExtinctionError(f"t={t} outside [0, {t_star}]")
    return math.sqrt(max(1.0 - 2.0 * t / (a * b), 0.0))


def staircase_facet_speed(a: float, b: float) -> float:
    """Upward speed 2 / (b - a) of a flat valley [a, b] in the 1-D profile flow."""
    if b <= a:
        raise EmptyFacetError("facet requires b > a")
    return 2.0 / (b - a)


def breaking_facet_value(x, t: float):
    """Exact evolving profile of the breaking L-shaped facet.

    The initial indicator of the L-region decays with speed 3 on the tall
    rectangle A and speed 4 on the short rectangle B. Accepts a single point
    (2,) or an array of points (..., 2).
    """
    p = np.asarray(x, dtype=float)
    scalar = p.ndim == 1
    pts = np.atleast_2d(p)
    (ax0, ax1), (ay0, ay1) = BREAKING_A
    (bx0, bx1), (by0, by1) = BREAKING_B
    in_a = (pts[..., 0] >= ax0) & (pts[..., 0] <= ax1) & \
           (pts[..., 1] >= ay0) & (pts[..., 1] <= ay1)
    in_b = (pts[..., 0] >= bx0) & (pts[..., 0] <= bx1) & \
           (pts[..., 1] >= by0) & (pts[..., 1] <= by1)
    val = max(1.0 - BREAKING_SPEED_A * t, 0.0) * in_a.astype(float) + \
        max(1.0 - BREAKING_SPEED_B * t, 0.0) * in_b.astype(float)
    return float(val[0]) if scalar else val
