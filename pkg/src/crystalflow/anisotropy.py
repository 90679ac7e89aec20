"""Crystalline surface-energy densities represented by their Wulff polygon.

The Wulff polygon is the primary datum. The energy density sigma is recovered
as its support function, and the polar gauge sigma_polar as the gauge whose
unit ball is the Wulff polygon itself. Admissible directions are the outer
normals of the Wulff edges; Delta(n) is the matching edge length.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _geometry as geom
from .errors import (
    DegenerateEdgeError,
    NonConvexError,
    OriginOutsideError,
)

ANGLE_TOL = 1e-10  # direction equality tolerance, radians


class Anisotropy:
    """Crystalline anisotropy built from a convex Wulff polygon.

    Attributes
    ----------
    wulff_vertices : (m, 2) array, counterclockwise, origin strictly inside.
    angles : (m,) sorted outer-normal angles in [0, 2pi).
    normals : (m, 2) unit outer normals of the Wulff edges.
    deltas : (m,) Wulff edge lengths Delta(n_k).
    supports : (m,) support values sigma(n_k) (> 0).
    """

    def __init__(self, wulff_vertices, name: str | None = None):
        verts = np.asarray(wulff_vertices, dtype=float)
        if verts.ndim != 2 or verts.shape[1] != 2 or len(verts) < 3:
            raise NonConvexError("need at least 3 planar vertices")
        verts = geom.ensure_ccw(verts)

        edges = np.roll(verts, -1, axis=0) - verts
        lens = np.linalg.norm(edges, axis=1)
        scale = float(lens.max())
        if np.any(lens <= 1e-12 * scale):
            raise DegenerateEdgeError("zero-length Wulff edge")

        cross = edges[:, 0] * np.roll(edges, -1, axis=0)[:, 1] - \
            edges[:, 1] * np.roll(edges, -1, axis=0)[:, 0]
        if np.any(cross <= 1e-12 * scale * scale):
            raise NonConvexError("Wulff polygon is not strictly convex")

        normals = np.stack([edges[:, 1], -edges[:, 0]], axis=1) / lens[:, None]
        supports = np.einsum("ij,ij->i", verts, normals)
        if np.any(supports <= 1e-12 * scale):
            raise OriginOutsideError("origin is not strictly inside the Wulff polygon")

        angles = np.arctan2(normals[:, 1], normals[:, 0]) % (2.0 * np.pi)
        order = np.argsort(angles)
        # edge k runs from vertex k to vertex k+1; keep vertices aligned with
        # the sorted edge order so that vertex k+1 sits between normals k, k+1
        self.wulff_vertices = verts[order]
        self.angles = angles[order]
        self.normals = normals[order]
        self.deltas = lens[order]
        self.supports = supports[order]
        self.name = name
        # Frank polygon vertices: outer normals scaled to the {sigma = 1} level
        self.frank_vertices = self.normals / self.supports[:, None]
        self._frozen = True

    def __setattr__(self, key, value):
        if getattr(self, "_frozen", False):
            raise AttributeError("Anisotropy is immutable")
        super().__setattr__(key, value)

    @property
    def m(self) -> int:
        """Number of admissible directions."""
        return len(self.angles)

    def sigma(self, p):
        """Energy density: support function of the Wulff polygon. (..., 2) -> (...)."""
        p = np.asarray(p, dtype=float)
        return np.max(p @ self.wulff_vertices.T, axis=-1)

    def sigma_polar(self, x):
        """Gauge of the Wulff polygon; sigma_polar(x) <= 1 iff x in W. (..., 2) -> (...)."""
        x = np.asarray(x, dtype=float)
        return np.max(x @ self.frank_vertices.T, axis=-1)

    def facet_length(self, k: int) -> float:
        """Delta(n_k): length of the Wulff edge with normal n_k."""
        return float(self.deltas[k])

    def direction_index(self, angle: float) -> int | None:
        """Index of the admissible angle matching `angle` within tolerance."""
        theta = float(angle) % (2.0 * np.pi)
        diff = np.abs(geom.wrap_angle(self.angles - theta))
        k = int(np.argmin(diff))
        return k if diff[k] <= ANGLE_TOL else None

    def gaps(self):
        """Consecutive angle gaps phi_k = theta_{k+1} - theta_k (cyclic), (m,)."""
        return (np.roll(self.angles, -1) - self.angles) % (2.0 * np.pi)

    def contains(self, x, slack: float = 0.0):
        """Membership test for the Wulff polygon, sigma_polar(x) <= 1 + slack."""
        return self.sigma_polar(x) <= 1.0 + slack

    def to_json(self) -> str:
        d = {"wulff": self.wulff_vertices.tolist()}
        if self.name:
            d["name"] = self.name
        return json.dumps(d)

    @staticmethod
    def from_json(text: str) -> "Anisotropy":
        d = json.loads(text)
        return Anisotropy(d["wulff"], name=d.get("name"))

    def __repr__(self):
        tag = self.name or "custom"
        return f"Anisotropy({tag}, m={self.m})"


def new_crystalline(wulff_vertices, name: str | None = None) -> Anisotropy:
    """Build a crystalline anisotropy from Wulff polygon vertices."""
    return Anisotropy(wulff_vertices, name=name)


def built_in(name: str) -> Anisotropy:
    """Built-in anisotropies addressable by name: 'l1', 'linf', 'hexagon'."""
    key = name.lower()
    if key == "l1":
        # sigma(p) = |p1| + |p2|; Wulff shape is the square [-1, 1]^2
        return Anisotropy([(1, 1), (-1, 1), (-1, -1), (1, -1)], name="l1")
    if key == "linf":
        # sigma(p) = max(|p1|, |p2|); Wulff shape is the diamond
        return Anisotropy([(1, 0), (0, 1), (-1, 0), (0, -1)], name="linf")
    if key == "hexagon":
        ang = np.arange(6) * (np.pi / 3.0)
        return Anisotropy(np.stack([np.cos(ang), np.sin(ang)], axis=1), name="hexagon")
    raise ValueError(f"unknown built-in anisotropy: {name!r}")


def load_anisotropy(spec: str) -> Anisotropy:
    """Resolve a name ('l1', 'hexagon', 'linf') or a JSON descriptor file path."""
    try:
        return built_in(spec)
    except ValueError:
        pass
    with open(spec, "r", encoding="utf-8") as fh:
        return Anisotropy.from_json(fh.read())


@dataclass
class SpeedLaw:
    """Normal-velocity law V = g(n, kappa), non-decreasing in kappa.

    kind 'linear': g(n, k) = M(n) * (k + drive)
    kind 'power' : g(n, k) = M(n) * sign(k) |k|^alpha
    kind 'custom': g supplied per direction index as custom_fn(k_index, kappa)

    Mobility is given either per admissible direction (array aligned with the
    anisotropy's angle order), as a scalar, as the string 'sigma' (mobility
    equal to the energy density), or as a callable on unit vectors. A callable
    (or 'sigma') also serves as the directional extension needed by corner-
    preservation checks.
    """

    kind: str
    anisotropy: Anisotropy
    mobility_values: np.ndarray = field(default=None, repr=False)
    mobility_fn: Callable = field(default=None, repr=False)
    drive: float = 0.0
    alpha: float = 1.0
    custom_fn: Callable = field(default=None, repr=False)

    @staticmethod
    def _resolve_mobility(an: Anisotropy, mobility):
        if isinstance(mobility, str):
            if mobility != "sigma":
                raise ValueError(f"unknown mobility spec {mobility!r}")
            return an.supports.copy(), an.sigma
        if callable(mobility):
            vals = np.array([float(mobility(n)) for n in an.normals])
            return vals, mobility
        vals = np.asarray(mobility, dtype=float)
        if vals.ndim == 0:
            vals = np.full(an.m, float(vals))
        if vals.shape != (an.m,):
            raise ValueError("mobility must be scalar, per-direction, or callable")
        return vals, None

    @classmethod
    def linear(cls, an: Anisotropy, mobility=1.0, drive: float = 0.0) -> "SpeedLaw":
        vals, fn = cls._resolve_mobility(an, mobility)
        if np.any(vals <= 0):
            raise ValueError("mobility must be strictly positive")
        return cls("linear", an, mobility_values=vals, mobility_fn=fn, drive=float(drive))

    @classmethod
    def power(cls, an: Anisotropy, alpha: float, mobility=1.0) -> "SpeedLaw":
        if alpha <= 0:
            raise ValueError("alpha must be positive")
        vals, fn = cls._resolve_mobility(an, mobility)
        if np.any(vals <= 0):
            raise ValueError("mobility must be strictly positive")
        return cls("power", an, mobility_values=vals, mobility_fn=fn, alpha=float(alpha))

    @classmethod
    def custom(cls, an: Anisotropy, fn: Callable, check_monotone: bool = True) -> "SpeedLaw":
        if check_monotone:
            ks = np.linspace(-20.0, 20.0, 81)
            for j in range(an.m):
                vals = np.array([fn(j, k) for k in ks])
                if np.any(np.diff(vals) < -1e-12 * max(1.0, np.abs(vals).max())):
                    raise ValueError("custom law must be non-decreasing in kappa")
        return cls("custom", an, custom_fn=fn)

    def facet_speeds(self, dir_indices, kappas):
        """Vectorized g over facets. dir_indices may contain -1 for weak
        (non-admissible) directions, which get unit mobility."""
        idx = np.asarray(dir_indices)
        kap = np.asarray(kappas, dtype=float)
        if self.kind == "custom":
            return np.array([self.custom_fn(int(j), float(k)) for j, k in zip(idx, kap)])
        mob = np.where(idx >= 0, self.mobility_values[np.clip(idx, 0, None)], 1.0)
        if self.kind == "linear":
            return mob * (kap + self.drive)
        return mob * np.sign(kap) * np.abs(kap) ** self.alpha

    def zero_speed(self, m_vec):
        """g(m, 0) for an arbitrary unit direction, used by corner checks.

        Requires a directional mobility extension unless the law vanishes at
        kappa = 0 identically.
        """
        if self.kind == "linear":
            if self.drive == 0.0:
                return 0.0
            if self.mobility_fn is None:
                raise ValueError("corner check needs a mobility extension "
                                 "(callable or 'sigma') when drive != 0")
            return float(self.mobility_fn(np.asarray(m_vec, dtype=float))) * self.drive
        if self.kind == "power":
            return 0.0
        raise ValueError("custom laws do not define g(m, 0) off the fan")

    @property
    def degenerate(self) -> bool:
        """Power laws with alpha < 1 may pinch degenerately."""
        return self.kind == "power" and self.alpha < 1.0


def is_corner_preserving(an: Anisotropy, law: SpeedLaw, samples: int = 64,
                         rel_tol: float = 1e-12):
    """Check the corner-preserving identity for g(., 0) on every fan arc.

    For each arc (theta_k, theta_{k+1}) the zero-curvature speed of every
    intermediate direction m must interpolate the endpoint speeds as
    g(m,0) = [g(n_k,0) sin(psi_{k+1}) + g(n_{k+1},0) sin(psi_k)] / sin(phi),
    where psi_k, psi_{k+1} are the angles from n_k, n_{k+1} to m.

    Returns (ok, worst) with worst the largest relative violation found.
    """
    worst = 0.0
    gaps = an.gaps()
    g_nodes = np.array([law.zero_speed(n) for n in an.normals])
    for k in range(an.m):
        phi = gaps[k]
        g0 = g_nodes[k]
        g1 = g_nodes[(k + 1) % an.m]
        for s in range(1, samples + 1):
            psi_k = phi * s / (samples + 1)
            psi_k1 = phi - psi_k
            theta = an.angles[k] + psi_k
            m_vec = np.array([np.cos(theta), np.sin(theta)])
            lhs = law.zero_speed(m_vec)
            rhs = (g0 * np.sin(psi_k1) + g1 * np.sin(psi_k)) / np.sin(phi)
            denom = max(abs(lhs), abs(rhs), 1e-300)
            err = abs(lhs - rhs) / denom if denom > 0 else 0.0
            if abs(lhs) < 1e-300 and abs(rhs) < 1e-300:
                err = 0.0
            worst = max(worst, err)
    return worst <= rel_tol, worst


def named_law(an: Anisotropy, name: str, drive: float = 0.0,
              alpha: float | None = None) -> SpeedLaw:
    """Laws addressable from the CLI: 'sigma_kappa' (V = sigma(n) kappa),
    'kappa' (V = kappa), 'eikonal' (V = kappa + drive), 'power' (V = |k|^(a-1) k)."""
    key = name.lower()
    if key == "sigma_kappa":
        return SpeedLaw.linear(an, mobility="sigma", drive=drive)
    if key == "kappa":
        return SpeedLaw.linear(an, mobility=1.0, drive=drive)
    if key == "eikonal":
        return SpeedLaw.linear(an, mobility=1.0, drive=drive)
    if key == "power":
        return SpeedLaw.power(an, alpha=alpha if alpha is not None else 1.0)
    raise ValueError(f"unknown speed law {name!r}")
