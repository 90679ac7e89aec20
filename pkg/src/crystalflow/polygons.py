"""Admissible polygons: facet-based representation and crystalline curvature.

Conventions fixed once for the whole toolkit: boundaries run counterclockwise,
normals point outward, the tangent is the normal rotated by +90 degrees, and
the signed corner turn phi_j = theta_j - theta_{j-1} is wrapped to (-pi, pi).
With these choices a convex polygon has all phi_j > 0, every transition number
chi_j = -1, and the boundary of the Wulff polygon has crystalline curvature -1.
"""

from __future__ import annotations

import json
from typing import Sequence

import numpy as np

from . import _geometry as geom
from .anisotropy import ANGLE_TOL, Anisotropy
from .errors import (
    AdjacencyViolationError,
    NonAdmissibleDirectionError,
    NotSimpleError,
    ParallelAdjacentFacetsError,
    ZeroLengthError,
)

CLOSURE_REL_TOL = 1e-9


class AdmissiblePolygon:
    """Closed oriented polygon whose facet normals live in the Wulff fan.

    Facet j is described by a direction index k_j into the anisotropy's angle
    table (or -1 with an explicit angle for weakly admissible facets, which
    carry Delta = 0) and a length L_j > 0. Vertices are reconstructed from the
    anchor (first vertex) by walking the tangents.
    """

    def __init__(self, anisotropy: Anisotropy, dir_indices, lengths, anchor,
                 weak: bool = False, angles=None, _validate: bool = True):
        self.anisotropy = anisotropy
        self.dir_indices = np.asarray(dir_indices, dtype=int)
        self.lengths = np.asarray(lengths, dtype=float)
        self.anchor = np.asarray(anchor, dtype=float)
        self.weak = bool(weak)

        if angles is None:
            if np.any(self.dir_indices < 0):
                raise NonAdmissibleDirectionError(
                    "weak facets need explicit angles")
            self.angles = anisotropy.angles[self.dir_indices]
        else:
            self.angles = np.asarray(angles, dtype=float) % (2 * np.pi)

        self.normals = np.stack([np.cos(self.angles), np.sin(self.angles)], axis=1)
        self.tangents = geom.rot90(self.normals)
        self.deltas = np.where(self.dir_indices >= 0,
                               anisotropy.deltas[np.clip(self.dir_indices, 0, None)],
                               0.0)
        if _validate:
            self._validate()

    # --- construction ---

    def _validate(self):
        n = len(self.lengths)
        if n < 3:
            raise ZeroLengthError("polygon needs at least 3 facets")
        if np.any(self.lengths <= 0):
            raise ZeroLengthError("facet lengths must be positive")
        if not self.weak and np.any(self.dir_indices < 0):
            raise NonAdmissibleDirectionError(
                "non-admissible facet direction in strict mode")
        phis = self.turn_angles()
        if np.any(np.abs(phis) <= ANGLE_TOL):
            raise AdjacencyViolationError("adjacent facets share a direction")
        self._check_adjacency()
        defect = np.linalg.norm(self.tangents.T @ self.lengths)
        if defect > CLOSURE_REL_TOL * max(self.perimeter(), 1e-300) * 10:
            raise ValueError(f"polygon does not close (defect {defect:.3e})")

    def _check_adjacency(self):
        """No fan direction may sit strictly inside the turn arc between
        consecutive facet normals. Weak facets join the fan with Delta = 0."""
        an = self.anisotropy
        thetas = self.angles
        fan = an.angles if not self.weak else np.union1d(an.angles, thetas)
        n = len(thetas)
        for j in range(n):
            t0 = thetas[j - 1]
            phi = geom.wrap_angle(thetas[j] - t0)
            for theta_fan in fan:
                d = geom.wrap_angle(theta_fan - t0)
                if phi > 0 and ANGLE_TOL < d < phi - ANGLE_TOL:
                    raise AdjacencyViolationError(
                        f"fan direction {theta_fan:.6f} inside turn at facet {j}")
                if phi < 0 and phi + ANGLE_TOL < d < -ANGLE_TOL:
                    raise AdjacencyViolationError(
                        f"fan direction {theta_fan:.6f} inside turn at facet {j}")

    @staticmethod
    def from_facets(anisotropy: Anisotropy, dir_indices, lengths, anchor=(0.0, 0.0),
                    weak: bool = False) -> "AdmissiblePolygon":
        return AdmissiblePolygon(anisotropy, dir_indices, lengths, anchor, weak=weak)

    @staticmethod
    def from_vertices(points, anisotropy: Anisotropy,
                      weak: bool = False) -> "AdmissiblePolygon":
        """Build from a simple closed vertex chain, snapping edge normals to
        the admissible fan (strict mode) or keeping them with Delta = 0 (weak
        mode), then restoring exact closure by a least-squares length tweak."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
            raise NotSimpleError("need at least 3 planar vertices")
        scale = np.ptp(pts, axis=0).max()
        # drop consecutive duplicates (incl. wrap-around)
        keep = [0]
        for i in range(1, len(pts)):
            if np.linalg.norm(pts[i] - pts[keep[-1]]) > 1e-12 * scale:
                keep.append(i)
        if np.linalg.norm(pts[keep[-1]] - pts[keep[0]]) <= 1e-12 * scale:
            keep.pop()
        pts = pts[keep]
        if len(pts) < 3 or not geom.polygon_is_simple(pts):
            raise NotSimpleError("polygon boundary is degenerate or self-intersects")
        pts = geom.ensure_ccw(pts)

        edges = np.roll(pts, -1, axis=0) - pts
        lens = np.linalg.norm(edges, axis=1)
        raw_angles = np.arctan2(-edges[:, 0], edges[:, 1]) % (2 * np.pi)

        idx, angs = [], []
        for th in raw_angles:
            k = anisotropy.direction_index(th)
            if k is None:
                if not weak:
                    raise NonAdmissibleDirectionError(
                        f"edge normal angle {th:.6f} not in the admissible fan")
                idx.append(-1)
                angs.append(th)
            else:
                idx.append(k)
                angs.append(anisotropy.angles[k])

        # merge consecutive edges with equal snapped direction
        m_idx, m_ang, m_len = [], [], []
        for k, th, ln in zip(idx, angs, lens):
            if m_ang and abs(geom.wrap_angle(th - m_ang[-1])) <= ANGLE_TOL:
                m_len[-1] += ln
            else:
                m_idx.append(k)
                m_ang.append(th)
                m_len.append(ln)
        if len(m_ang) > 1 and abs(geom.wrap_angle(m_ang[0] - m_ang[-1])) <= ANGLE_TOL:
            m_len[0] += m_len.pop()
            m_ang.pop()
            m_idx.pop()

        m_ang = np.asarray(m_ang)
        m_len = np.asarray(m_len)
        tangents = geom.rot90(np.stack([np.cos(m_ang), np.sin(m_ang)], axis=1))
        # least-squares closure correction: min |dL| s.t. T (L + dL) = 0
        defect = tangents.T @ m_len
        gram = tangents.T @ tangents
        corr = tangents @ np.linalg.solve(gram, defect)
        m_len = m_len - corr
        if np.any(m_len <= 0):
            raise ZeroLengthError("closure correction produced a non-positive length")

        return AdmissiblePolygon(anisotropy, m_idx, m_len, pts[0], weak=weak,
                                 angles=m_ang)

    # --- derived geometry ---

    def __len__(self):
        return len(self.lengths)

    def turn_angles(self):
        """Signed corner turns phi_j = wrap(theta_j - theta_{j-1}), (n,)."""
        return geom.wrap_angle(self.angles - np.roll(self.angles, 1))

    def vertices(self):
        """Vertex chain (n, 2); vertex j starts facet j."""
        steps = self.lengths[:, None] * self.tangents
        pts = self.anchor + np.concatenate(
            [np.zeros((1, 2)), np.cumsum(steps[:-1], axis=0)], axis=0)
        return pts

    def perimeter(self) -> float:
        return float(self.lengths.sum())

    def area(self) -> float:
        return geom.polygon_signed_area(self.vertices())

    def closure_defect(self) -> float:
        return float(np.linalg.norm(self.tangents.T @ self.lengths))

    def is_convex(self) -> bool:
        return bool(np.all(self.turn_angles() > 0))

    def translated(self, shift) -> "AdmissiblePolygon":
        return AdmissiblePolygon(self.anisotropy, self.dir_indices, self.lengths,
                                 self.anchor + np.asarray(shift, dtype=float),
                                 weak=self.weak, angles=self.angles,
                                 _validate=False)

    def with_lengths(self, lengths, anchor=None) -> "AdmissiblePolygon":
        return AdmissiblePolygon(self.anisotropy, self.dir_indices, lengths,
                                 self.anchor if anchor is None else anchor,
                                 weak=self.weak, angles=self.angles,
                                 _validate=False)

    # --- serialization ---

    def to_json(self) -> str:
        facets = []
        for k, l, a in zip(self.dir_indices, self.lengths, self.angles):
            rec = {"dir": int(k), "len": float(l)}
            if k < 0:
                rec["angle"] = float(a)
            facets.append(rec)
        return json.dumps({"anchor": self.anchor.tolist(), "facets": facets})

    @staticmethod
    def from_json(text: str, anisotropy: Anisotropy,
                  weak: bool = False) -> "AdmissiblePolygon":
        d = json.loads(text)
        if "vertices" in d:
            return AdmissiblePolygon.from_vertices(d["vertices"], anisotropy, weak=weak)
        idx = [f["dir"] for f in d["facets"]]
        lens = [f["len"] for f in d["facets"]]
        angs = [f["angle"] if f["dir"] < 0 else anisotropy.angles[f["dir"]]
                for f in d["facets"]]
        return AdmissiblePolygon(anisotropy, idx, lens, d["anchor"], weak=weak,
                                 angles=angs)


def wulff_polygon(an: Anisotropy, scale: float = 1.0,
                  center=(0.0, 0.0)) -> AdmissiblePolygon:
    """The boundary of scale * W_sigma as an admissible polygon."""
    return AdmissiblePolygon(
        an, np.arange(an.m), an.deltas * scale,
        np.asarray(center, dtype=float) + scale * an.wulff_vertices[0])


def rectangle_polygon(an: Anisotropy, a: float, b: float,
                      center=(0.0, 0.0)) -> AdmissiblePolygon:
    """Axis-aligned rectangle (-a, a) x (-b, b) + center (needs axis normals)."""
    cx, cy = center
    pts = [(cx + a, cy - b), (cx + a, cy + b), (cx - a, cy + b), (cx - a, cy - b)]
    return AdmissiblePolygon.from_vertices(pts, an)


# --- facet calculus on polygons ---

def transition_numbers(p: AdmissiblePolygon):
    """chi_j: -1 if both corner turns of facet j are convex (phi > 0),
    +1 if both are reflex, 0 for inflection facets."""
    phi = p.turn_angles()
    phi_next = np.roll(phi, -1)
    chi = np.zeros(len(p), dtype=int)
    chi[(phi > 0) & (phi_next > 0)] = -1
    chi[(phi < 0) & (phi_next < 0)] = 1
    return chi


def crystalline_curvature(p: AdmissiblePolygon):
    """Per-facet kappa_j = chi_j Delta(n_j) / L_j (zero on Delta = 0 facets)."""
    if np.any(p.lengths <= 0):
        raise ZeroLengthError("curvature undefined on zero-length facet")
    return transition_numbers(p) * p.deltas / p.lengths


def length_derivative(p: AdmissiblePolygon, speeds):
    """dL_j/dt for given facet normal velocities, from the corner kinematics.

    Each vertex velocity solves the 2x2 system xdot . n = V on its two facets;
    the tangential difference of the two vertex velocities of facet j gives

        dL_j/dt = V_{j-1}/sin(phi_j) - (cot(phi_j) + cot(phi_{j+1})) V_j
                  + V_{j+1}/sin(phi_{j+1}).
    """
    V = np.asarray(speeds, dtype=float)
    phi = p.turn_angles()
    sin_phi = np.sin(phi)
    if np.any(np.abs(sin_phi) < 1e-12):
        raise ParallelAdjacentFacetsError("parallel adjacent facets")
    cot_phi = np.cos(phi) / sin_phi
    sin_next = np.roll(sin_phi, -1)
    cot_next = np.roll(cot_phi, -1)
    return (np.roll(V, 1) / sin_phi
            - (cot_phi + cot_next) * V
            + np.roll(V, -1) / sin_next)


def vertex_velocities(p: AdmissiblePolygon, speeds):
    """Velocity of every vertex ((n, 2)); vertex j joins facets j-1 and j."""
    V = np.asarray(speeds, dtype=float)
    n_prev = np.roll(p.normals, 1, axis=0)
    n_cur = p.normals
    det = n_prev[:, 0] * n_cur[:, 1] - n_prev[:, 1] * n_cur[:, 0]
    if np.any(np.abs(det) < 1e-12):
        raise ParallelAdjacentFacetsError("parallel adjacent facets")
    v_prev = np.roll(V, 1)
    vx = (v_prev * n_cur[:, 1] - V * n_prev[:, 1]) / det
    vy = (V * n_prev[:, 0] - v_prev * n_cur[:, 0]) / det
    return np.stack([vx, vy], axis=1)


def encloses(outer: AdmissiblePolygon, inner: AdmissiblePolygon,
             tol: float = None) -> bool:
    """True iff every inner vertex lies inside/on the outer polygon and the
    boundaries do not cross."""
    outer_pts = outer.vertices()
    inner_pts = inner.vertices()
    if tol is None:
        tol = 1e-9 * max(outer.perimeter(), 1.0)
    if not np.all(geom.point_in_polygon(inner_pts, outer_pts, tol=tol)):
        return False
    return not geom.polygons_cross(outer_pts, inner_pts)
