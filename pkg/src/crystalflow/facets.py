"""Signed anisotropic perimeter, Cheeger-type ratios, and facet curvatures.

A facet is a polygonal region (with optional holes) whose boundary segments
carry a sign: + where the surrounding profile rises in the outward direction,
- where it falls. The signed perimeter integrates sigma(outward normal) with
those signs; dividing by the area gives the Cheeger-type ratio that equals the
facet speed when the facet is calibrable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import _geometry as geom
from .anisotropy import Anisotropy
from .errors import (
    BadRadiiError,
    CandidateNotContainedError,
    UnlabeledSegmentError,
    ZeroAreaError,
)
from .exact import BREAKING_A, BREAKING_B


@dataclass
class FacetSpec:
    """Polygonal region with holes and per-segment boundary labels.

    outer: (n, 2) ring, stored counterclockwise. holes: list of rings, stored
    clockwise (region on the left along every stored ring). outer_labels and
    hole_labels hold one +/-1 per segment (segment i joins vertex i to i+1).
    """

    outer: np.ndarray
    outer_labels: np.ndarray
    holes: list = field(default_factory=list)
    hole_labels: list = field(default_factory=list)

    def __post_init__(self):
        outer = np.asarray(self.outer, dtype=float)
        flipped = geom.polygon_signed_area(outer) < 0
        self.outer = outer[::-1].copy() if flipped else outer
        self.outer_labels = self._check_labels(self.outer_labels, len(self.outer),
                                               flipped, "outer")
        holes, labels = [], []
        for i, h in enumerate(self.holes):
            h = np.asarray(h, dtype=float)
            flip = geom.polygon_signed_area(h) > 0  # holes run clockwise
            holes.append(h[::-1].copy() if flip else h)
            lab = self.hole_labels[i] if i < len(self.hole_labels) else None
            labels.append(self._check_labels(lab, len(h), flip, f"hole {i}"))
        self.holes = holes
        self.hole_labels = labels
        if self.area() <= 0:
            raise ZeroAreaError("facet region must have positive area")

    @staticmethod
    def _check_labels(labels, n, flipped, where):
        if labels is None:
            raise UnlabeledSegmentError(f"{where}: missing segment labels")
        lab = np.asarray(labels, dtype=int)
        if lab.shape != (n,) or np.any(np.abs(lab) != 1):
            raise UnlabeledSegmentError(
                f"{where}: need one +/-1 label per segment, got {lab.shape}")
        if flipped:
            # new segment i joins old vertices (n-1-i, n-2-i): old segment n-2-i
            lab = np.roll(lab[::-1], -1).copy()
        return lab

    @staticmethod
    def all_plus(outer, holes=(), hole_signs=None) -> "FacetSpec":
        """Convenience: every boundary segment labeled +, or per-hole signs."""
        outer = np.asarray(outer, dtype=float)
        holes = [np.asarray(h, dtype=float) for h in holes]
        if hole_signs is None:
            hole_signs = [1] * len(holes)
        return FacetSpec(outer, np.ones(len(outer), dtype=int), holes,
                         [np.full(len(h), s, dtype=int)
                          for h, s in zip(holes, hole_signs)])

    def rings(self):
        yield self.outer, self.outer_labels
        for h, lab in zip(self.holes, self.hole_labels):
            yield h, lab

    def area(self) -> float:
        a = geom.polygon_signed_area(self.outer)
        for h in self.holes:
            a += geom.polygon_signed_area(h)  # holes are clockwise: negative
        return float(a)

    def scaled(self, lam: float) -> "FacetSpec":
        return FacetSpec(self.outer * lam, self.outer_labels,
                         [h * lam for h in self.holes],
                         [l.copy() for l in self.hole_labels])

    def contains(self, other: "FacetSpec", tol: float = 1e-9) -> bool:
        """Geometric containment of other's region inside this region."""
        scale = max(np.ptp(self.outer, axis=0).max(), 1.0)
        eps = tol * scale
        pts = other.outer
        if not np.all(geom.point_in_polygon(pts, self.outer, tol=eps)):
            return False
        for h in self.holes:
            # vertices strictly inside a hole lie outside the region
            if np.any(geom.point_in_polygon(pts, h) & ~_near_ring(pts, h, eps)):
                return False
        if geom.polygons_cross(self.outer, other.outer):
            return False
        for h in self.holes:
            if geom.polygons_cross(h, other.outer):
                return False
        return True

    def to_json(self) -> str:
        return json.dumps({
            "outer": self.outer.tolist(),
            "holes": [h.tolist() for h in self.holes],
            "labels": {"outer": self.outer_labels.tolist(),
                       "holes": [l.tolist() for l in self.hole_labels]},
        })

    @staticmethod
    def from_json(text: str) -> "FacetSpec":
        d = json.loads(text)
        labels = d.get("labels", {})
        return FacetSpec(d["outer"], labels.get("outer"),
                         d.get("holes", []), labels.get("holes", []))


def _near_ring(pts, ring, eps):
    ring = np.asarray(ring, dtype=float)
    d = geom.distance_to_segments(np.atleast_2d(pts), ring,
                                  np.roll(ring, -1, axis=0))
    return d <= eps


def signed_perimeter(f: FacetSpec, an: Anisotropy) -> float:
    """SP(F): sum over boundary segments of sign * sigma(outward normal) * length.

    By 1-homogeneity this is sigma applied to the un-normalized outward edge
    normal, exact for polygons.
    """
    total = 0.0
    for ring, labels in f.rings():
        edges = np.roll(ring, -1, axis=0) - ring
        normals = np.stack([edges[:, 1], -edges[:, 0]], axis=1)  # outward, length-weighted
        total += float(np.sum(labels * an.sigma(normals)))
    return total


def cheeger_ratio(f: FacetSpec, an: Anisotropy) -> float:
    """SP(F) / area(F)."""
    a = f.area()
    if a <= 0:
        raise ZeroAreaError("cheeger ratio needs positive area")
    return signed_perimeter(f, an) / a


def calibrability_verdict(f: FacetSpec, an: Anisotropy, candidates):
    """Witness-based calibrability test on user-supplied candidate subsets.

    Returns (verdict, worst_index, worst_ratio): 'Violated' if some candidate
    has a strictly smaller ratio than the facet itself (such a witness rules
    out calibrability), else 'ConsistentOnCandidates' (not a proof).
    """
    base = cheeger_ratio(f, an)
    worst_idx, worst_ratio = None, np.inf
    for i, cand in enumerate(candidates):
        if not f.contains(cand):
            raise CandidateNotContainedError(f"candidate {i} not contained in facet")
        r = cheeger_ratio(cand, an)
        if r < worst_ratio:
            worst_idx, worst_ratio = i, r
    if worst_idx is not None and worst_ratio < base - 1e-12:
        return "Violated", worst_idx, worst_ratio
    return "ConsistentOnCandidates", worst_idx, worst_ratio


def candidate_family(f: FacetSpec, an: Anisotropy, n_scales: int = 4):
    """Built-in heuristic candidates: centered axis-aligned sub-rectangles and
    Wulff-shaped insets, strictly interior (so every label is +)."""
    lo = f.outer.min(axis=0)
    hi = f.outer.max(axis=0)
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    out = []
    for s in np.linspace(0.25, 0.85, n_scales):
        a, b = half * s
        rect = np.array([[center[0] - a, center[1] - b],
                         [center[0] + a, center[1] - b],
                         [center[0] + a, center[1] + b],
                         [center[0] - a, center[1] + b]])
        cand = FacetSpec.all_plus(rect)
        if f.contains(cand):
            out.append(cand)
        wul = center + s * min(a, b) * an.wulff_vertices / np.abs(
            an.wulff_vertices).max()
        cand = FacetSpec.all_plus(wul)
        if f.contains(cand):
            out.append(cand)
    return out


def lambda_closed_form(kind: str, r: float, R: float = None, n: int = 2) -> float:
    """Closed-form facet curvature for three model facets in dimension n.

    'wulff_facet'    : facet r*W, profile rising outward          -> n / r
    'facet_with_hole': annulus R*W \\ r*W, profile rising on both
                       sides                                      -> n (R^(n-1) + r^(n-1)) / (R^n - r^n)
    'convex_concave' : annulus with the profile falling into the
                       hole                                       -> n (R^(n-1) - r^(n-1)) / (R^n - r^n)
    """
    if n < 1:
        raise ValueError("dimension must be >= 1")
    key = kind.lower()
    if key == "wulff_facet":
        if r <= 0:
            raise BadRadiiError("need r > 0")
        return n / r
    if R is None or not (0 < r < R):
        raise BadRadiiError("need 0 < r < R")
    if key == "facet_with_hole":
        return n * (R ** (n - 1) + r ** (n - 1)) / (R ** n - r ** n)
    if key == "convex_concave":
        return n * (R ** (n - 1) - r ** (n - 1)) / (R ** n - r ** n)
    raise ValueError(f"unknown closed-form kind {kind!r}")


# --- model facet builders (n = 2 polygonal geometry) ---

def wulff_facet_spec(an: Anisotropy, r: float) -> FacetSpec:
    """The facet r*W of the profile max(sigma_polar - r, 0): all + labels."""
    if r <= 0:
        raise BadRadiiError("need r > 0")
    return FacetSpec.all_plus(an.wulff_vertices * r)


def annulus_facet_spec(an: Anisotropy, r: float, R: float,
                       inner_sign: int = 1) -> FacetSpec:
    """The annular facet R*W minus r*W. inner_sign +1 for the facet-with-hole
    profile (rises into the hole), -1 for the convex-concave profile."""
    if not (0 < r < R):
        raise BadRadiiError("need 0 < r < R")
    return FacetSpec.all_plus(an.wulff_vertices * R,
                              holes=[an.wulff_vertices * r],
                              hole_signs=[inner_sign])


def breaking_example_specs() -> dict:
    """Facet specs for the L-shaped breaking example under the square Wulff
    shape: the whole facet U, the tall piece A and the short piece B.

    U carries + on its entire boundary; A and B are the two rectangles the
    facet splits into, with their shared cut labeled from the post-breaking
    profile (the faster piece B sees the slower piece A below it: -).
    """
    (ax0, ax1), (ay0, ay1) = BREAKING_A
    (bx0, bx1), (by0, by1) = BREAKING_B
    u_ring = [(ax0, ay0), (ax1, ay0), (ax1, by0), (bx1, by0),
              (bx1, by1), (ax0, by1)]
    u = FacetSpec.all_plus(u_ring)

    a_ring = [(ax0, ay0), (ax1, ay0), (ax1, ay1), (ax0, ay1)]
    a_spec = FacetSpec.all_plus(a_ring)  # the cut is + seen from A

    b_ring = [(bx0, by0), (bx1, by0), (bx1, by1), (bx0, by1)]
    b_labels = [1, 1, 1, -1]  # left edge = cut against A: profile falls
    b_spec = FacetSpec(np.asarray(b_ring, dtype=float),
                       np.asarray(b_labels, dtype=int))
    return {"U": u, "A": a_spec, "B": b_spec}
