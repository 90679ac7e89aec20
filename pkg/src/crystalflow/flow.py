"""Evolution of admissible polygons by V = g(n, kappa).

The state is the anchor vertex plus the facet lengths. Between topological
events the system is a smooth ODE integrated by an embedded Runge-Kutta 4(5)
pair; facet disappearance is localized on the dense output and the flow is
restarted on the reduced polygon when it stays admissible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .anisotropy import SpeedLaw
from .errors import (
    AdjacencyViolationError,
    NonAdmissibleDirectionError,
    NotSimpleError,
    StiffnessFailureError,
    ZeroLengthError,
)
from .polygons import (
    AdmissiblePolygon,
    crystalline_curvature,
    length_derivative,
    transition_numbers,
    vertex_velocities,
)

EXTINCT = "extinction"
NON_ADMISSIBLE = "non_admissible_stop"
TIME_LIMIT = "time_limit"


@dataclass
class FlowEvent:
    time: float
    kind: str                       # "facet_gone" | "merge" | "extinction" | "non_admissible_stop"
    facets: tuple = ()


@dataclass
class FlowOptions:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-11
    length_floor: float = None      # default 1e-9 * initial perimeter
    area_floor: float = None        # default 1e-12 * initial area
    n_samples: int = 0              # extra uniformly spaced snapshot times
    sample_times: tuple = ()
    max_restarts: int = 200


@dataclass
class Trajectory:
    times: list = field(default_factory=list)
    polygons: list = field(default_factory=list)
    events: list = field(default_factory=list)
    status: str = TIME_LIMIT
    final_time: float = 0.0
    degenerate_law: bool = False

    @property
    def extinction_time(self):
        return self.final_time if self.status == EXTINCT else None

    def sample(self, t: float) -> AdmissiblePolygon:
        """Snapshot at the recorded time closest to t."""
        i = int(np.argmin(np.abs(np.asarray(self.times) - t)))
        return self.polygons[i]

    def lengths_at(self, t: float):
        return self.sample(t).lengths


def _speeds(p: AdmissiblePolygon, law: SpeedLaw, lengths):
    chi = transition_numbers(p)
    kappa = chi * p.deltas / lengths
    return law.facet_speeds(p.dir_indices, kappa)


def _rhs_factory(p: AdmissiblePolygon, law: SpeedLaw, floor: float):
    tangents = p.tangents
    guard = 0.05 * floor

    def rhs(t, y):
        lengths = np.maximum(y[2:], guard)
        V = _speeds(p, law, lengths)
        dL = length_derivative(p.with_lengths(lengths), V)
        danchor = vertex_velocities(p, V)[0]
        return np.concatenate([danchor, dL])

    return rhs


def _rebuild_after_event(p: AdmissiblePolygon, y, floor: float):
    """Drop facets at/below the length floor, merge parallel neighbors, and
    return (polygon, gone_indices, merged) or raise on lost admissibility.

    The reduced polygon is rebuilt from the surviving facet list (directions
    are exact fan angles), with a least-squares closure correction absorbing
    the sub-floor vertex displacements of the removed facets.
    """
    from ._geometry import rot90, wrap_angle
    from .anisotropy import ANGLE_TOL

    lengths = y[2:]
    anchor = y[:2]
    cur = p.with_lengths(np.maximum(lengths, 1e-300), anchor=anchor)
    gone = np.nonzero(lengths <= floor * (1.0 + 1e-3))[0]
    survivors = [j for j in range(len(p)) if j not in set(gone.tolist())]
    if len(survivors) < 3:
        return None, tuple(gone.tolist()), False
    verts = cur.vertices()

    # rotate so the survivor list does not start mid-run of equal directions
    n_s = len(survivors)
    start = 0
    for i in range(n_s):
        prev_j = survivors[i - 1]
        if abs(wrap_angle(p.angles[survivors[i]] - p.angles[prev_j])) > ANGLE_TOL:
            start = i
            break
    else:
        raise AdjacencyViolationError("all surviving facets are parallel")
    order = survivors[start:] + survivors[:start]

    m_idx, m_ang, m_len = [], [], []
    for j in order:
        if m_ang and abs(wrap_angle(p.angles[j] - m_ang[-1])) <= ANGLE_TOL:
            m_len[-1] += lengths[j]
        else:
            m_idx.append(int(p.dir_indices[j]))
            m_ang.append(float(p.angles[j]))
            m_len.append(float(lengths[j]))
    merged = len(m_ang) < n_s
    if len(m_ang) < 3:
        return None, tuple(gone.tolist()), merged

    m_ang = np.asarray(m_ang)
    m_len = np.asarray(m_len)
    tangents = rot90(np.stack([np.cos(m_ang), np.sin(m_ang)], axis=1))
    defect = tangents.T @ m_len
    corr = tangents @ np.linalg.solve(tangents.T @ tangents, defect)
    m_len = m_len - corr
    if np.any(m_len <= 0):
        raise AdjacencyViolationError("closure correction killed a facet")

    try:
        new_poly = AdmissiblePolygon(p.anisotropy, m_idx, m_len,
                                     verts[order[0]], weak=p.weak, angles=m_ang)
    except (NotSimpleError, NonAdmissibleDirectionError, AdjacencyViolationError,
            ZeroLengthError) as exc:
        raise AdjacencyViolationError(str(exc))
    return new_poly, tuple(gone.tolist()), merged


def evolve(p: AdmissiblePolygon, law: SpeedLaw, t_end: float,
           opts: FlowOptions = None) -> Trajectory:
    """Integrate the facet ODE system up to t_end with event handling.

    Terminal statuses: 'extinction' (fewer than 3 facets remain or the area
    dropped below the floor), 'non_admissible_stop' (facet removal broke the
    adjacency condition), 'time_limit'.
    """
    opts = opts or FlowOptions()
    floor = opts.length_floor
    if floor is None:
        floor = 1e-9 * p.perimeter()
    area_floor = opts.area_floor
    if area_floor is None:
        area_floor = 1e-12 * abs(p.area())

    sample_times = sorted(set(opts.sample_times) |
                          set(np.linspace(0.0, t_end, opts.n_samples).tolist()
                              if opts.n_samples else []))

    traj = Trajectory(degenerate_law=law.degenerate)
    traj.times.append(0.0)
    traj.polygons.append(p)

    t0 = 0.0
    cur = p
    for _ in range(opts.max_restarts):
        y0 = np.concatenate([cur.anchor, cur.lengths])
        rhs = _rhs_factory(cur, law, floor)

        def ev_length(t, y):
            return np.min(y[2:]) - floor
        ev_length.terminal = True
        ev_length.direction = -1

        def ev_area(t, y):
            q = cur.with_lengths(np.maximum(y[2:], 1e-300), anchor=y[:2])
            return q.area() - area_floor
        ev_area.terminal = True
        ev_area.direction = -1

        t_eval = [t for t in sample_times if t0 < t <= t_end]
        if t_eval and t_eval[-1] < t_end:
            t_eval.append(t_end)
        sol = solve_ivp(rhs, (t0, t_end), y0, method="RK45",
                        rtol=opts.rel_tol, atol=opts.abs_tol,
                        events=[ev_length, ev_area],
                        t_eval=t_eval if t_eval else None)
        if sol.status == -1:
            raise StiffnessFailureError(sol.message)

        for tk, yk in zip(sol.t, sol.y.T):
            traj.times.append(float(tk))
            traj.polygons.append(cur.with_lengths(yk[2:], anchor=yk[:2]))

        if sol.status == 0:
            traj.status = TIME_LIMIT
            traj.final_time = t_end
            return traj

        hit_length = len(sol.t_events[0]) > 0
        t_ev = float((sol.t_events[0] if hit_length else sol.t_events[1])[0])
        y_ev = (sol.y_events[0] if hit_length else sol.y_events[1])[0]

        if not hit_length:
            traj.status = EXTINCT
            traj.final_time = t_ev
            traj.events.append(FlowEvent(t_ev, "extinction"))
            return traj

        try:
            new_poly, gone, merged = _rebuild_after_event(cur, y_ev, floor)
        except AdjacencyViolationError:
            traj.status = NON_ADMISSIBLE
            traj.final_time = t_ev
            traj.events.append(FlowEvent(t_ev, NON_ADMISSIBLE))
            return traj

        traj.events.append(FlowEvent(t_ev, "facet_gone", gone))
        if new_poly is None or abs(new_poly.area()) <= area_floor:
            traj.status = EXTINCT
            traj.final_time = t_ev
            traj.events.append(FlowEvent(t_ev, "extinction"))
            return traj
        if merged:
            traj.events.append(FlowEvent(t_ev, "merge"))

        traj.times.append(t_ev)
        traj.polygons.append(new_poly)
        cur = new_poly
        t0 = t_ev

    raise StiffnessFailureError("too many topological events")
