"""Command-line front end.

Every subcommand validates its inputs, writes the declared output files, and
prints a single JSON summary line to stdout. Exit codes: 0 success, 2
validation error, 3 solver failure. Diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import exact as exact_mod
from .anisotropy import Anisotropy, load_anisotropy, named_law
from .chambolle import ChambolleOptions, EvolvingSet, Mobility
from .chambolle import evolve as chambolle_evolve
from .errors import CrystalflowError, StiffnessFailureError
from .facets import (
    FacetSpec,
    breaking_example_specs,
    calibrability_verdict,
    cheeger_ratio,
    lambda_closed_form,
    signed_perimeter,
    wulff_facet_spec,
    annulus_facet_spec,
)
from .flow import FlowOptions
from .flow import evolve as flow_evolve
from .grid import GridField, PERIODIC
from .polygons import AdmissiblePolygon, rectangle_polygon, wulff_polygon
from .svgout import write_svg
from .tv import ResolventParams, discrete_energy, estimate_min_section, resolvent_solve


class ValidationError(Exception):
    pass


def _load_init_polygon(args, an: Anisotropy) -> AdmissiblePolygon:
    init = args.init
    if init == "wulff":
        return wulff_polygon(an, scale=args.r0)
    if init == "rect":
        return rectangle_polygon(an, args.a, args.b)
    try:
        with open(init, "r", encoding="utf-8") as fh:
            return AdmissiblePolygon.from_json(fh.read(), an,
                                               weak=getattr(args, "weak", False))
    except OSError as exc:
        raise ValidationError(f"cannot read initial polygon: {exc}")


def _write_flow_csv(path, traj):
    max_facets = max(len(p) for p in traj.polygons)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh)
        wr.writerow(["t", "area", "perimeter", "n_facets"] +
                    [f"L{j}" for j in range(max_facets)])
        for t, p in zip(traj.times, traj.polygons):
            row = [f"{t:.12g}", f"{p.area():.12g}", f"{p.perimeter():.12g}",
                   len(p)]
            row += [f"{l:.12g}" for l in p.lengths]
            row += [""] * (max_facets - len(p))
            wr.writerow(row)


def cmd_flow(args):
    an = load_anisotropy(args.anisotropy)
    law = named_law(an, args.law, drive=args.drive, alpha=args.alpha)
    poly = _load_init_polygon(args, an)
    opts = FlowOptions(rel_tol=args.rel_tol, abs_tol=args.abs_tol,
                       n_samples=args.samples)
    traj = flow_evolve(poly, law, args.t_end, opts)

    outputs = []
    if args.csv:
        _write_flow_csv(args.csv, traj)
        outputs.append(args.csv)
    if args.events:
        with open(args.events, "w", encoding="utf-8") as fh:
            json.dump([{"time": e.time, "kind": e.kind,
                        "facets": list(e.facets)} for e in traj.events], fh)
        outputs.append(args.events)
    if args.svg:
        frames = [[p.vertices()] for p in traj.polygons]
        write_svg(args.svg, frames)
        outputs.append(args.svg)

    return {"status": traj.status,
            "extinction_time": traj.extinction_time,
            "final_time": traj.final_time,
            "events": len(traj.events),
            "outputs": outputs}


def cmd_chambolle(args):
    an = load_anisotropy(args.anisotropy)
    mob = Mobility(an, args.mobility if args.mobility == "sigma"
                   else float(args.mobility))
    poly = _load_init_polygon(args, an)
    E0 = EvolvingSet.from_polygons([poly.vertices()])
    opts = ChambolleOptions(spacing=args.spacing, band_width=args.band,
                            tol=args.tol)
    traj = chambolle_evolve(E0, args.h, args.t_end, an, mob, opts)

    outputs = []
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            wr = csv.writer(fh)
            wr.writerow(["k", "t", "area", "perimeter"])
            for k, (t, a, p) in enumerate(zip(traj.times, traj.areas,
                                              traj.perimeters)):
                wr.writerow([k, f"{t:.12g}", f"{a:.12g}", f"{p:.12g}"])
        outputs.append(args.csv)
    if args.svg and traj.sets:
        frames = [s.contours for s in traj.sets]
        write_svg(args.svg, frames)
        outputs.append(args.svg)

    return {"status": traj.status,
            "extinction_time": traj.extinction_time,
            "steps": len(traj.times) - 1,
            "final_area": traj.areas[-1],
            "outputs": outputs}


def _load_grid(args) -> GridField:
    path = args.psi
    if args.boundary == "periodic":
        boundary = PERIODIC
    else:
        try:
            kind, val = args.boundary.split(":")
            if kind != "pad":
                raise ValueError
            boundary = ("pad", float(val))
        except ValueError:
            raise ValidationError("boundary must be 'periodic' or 'pad:VALUE'")
    origin = tuple(args.origin)
    if path.endswith(".csv"):
        if args.spacing is None:
            raise ValidationError("CSV grids need --spacing")
        return GridField.load_csv(path, args.spacing, boundary, origin)
    return GridField.load_binary(path, boundary, origin)


def cmd_resolvent(args):
    an = load_anisotropy(args.anisotropy)
    psi = _load_grid(args)
    params = ResolventParams(a=args.a, tol=args.tol, max_iters=args.max_iters)
    sol = resolvent_solve(psi, an, params)
    outputs = []
    if args.out:
        sol.v.save_binary(args.out)
        outputs.append(args.out)
    if args.speed_out:
        psi.like((sol.v.values - psi.values) / args.a).save_binary(args.speed_out)
        outputs.append(args.speed_out)
    summary = {"status": "ok" if sol.converged else "no_convergence",
               "gap_per_node": sol.gap,
               "iterations": sol.iterations,
               "energy": discrete_energy(sol.v, an),
               "outputs": outputs}
    if not sol.converged:
        raise SolverFailure(summary)
    return summary


class SolverFailure(Exception):
    def __init__(self, summary):
        self.summary = summary


def _model_profile(kind, an, r, R, rows, cols, spacing, origin):
    def fn(X, Y):
        pts = np.stack([X, Y], axis=-1)
        g = an.sigma_polar(pts)
        if kind == "wulff_facet":
            return np.maximum(g - r, 0.0)
        if kind == "facet_with_hole":
            return np.maximum.reduce([r - g, np.zeros_like(g), g - R])
        return np.minimum(g - r, np.maximum(0.0, g - R))

    vals = fn(*np.meshgrid(origin[0] + spacing * np.arange(cols),
                           origin[1] + spacing * np.arange(rows)))
    pad = float(vals[0].max())
    return GridField(np.minimum(vals, pad), spacing, ("pad", pad), origin)


def cmd_lambda(args):
    value = lambda_closed_form(args.kind, args.r, args.R, args.n)
    summary = {"status": "ok", "kind": args.kind, "closed_form": value,
               "outputs": []}
    if args.estimate:
        an = load_anisotropy(args.anisotropy)
        big = args.R if args.R is not None else args.r
        half = 2.0 * big
        n_nodes = args.grid
        spacing = 2 * half / (n_nodes - 1)
        psi = _model_profile(args.kind, an, args.r, args.R, n_nodes, n_nodes,
                             spacing, (-half, -half))
        field = estimate_min_section(psi, an, a=2 * spacing,
                                     params=ResolventParams(tol=args.tol))
        X, Y = psi.coords()
        g = an.sigma_polar(np.stack([X, Y], axis=-1))
        if args.kind == "wulff_facet":
            mask = g <= args.r / np.sqrt(2.0)
        else:
            mid = 0.5 * (args.r + args.R)
            qu = 0.25 * (args.R - args.r)
            mask = (g >= mid - qu) & (g <= mid + qu)
        summary["estimate"] = float(np.median(field.values[mask]))
    return summary


def cmd_facet(args):
    an = load_anisotropy(args.anisotropy)
    if args.spec == "breaking":
        specs = breaking_example_specs()
        ratios = {name: cheeger_ratio(s, an) for name, s in specs.items()}
        verdict, wi, wr = calibrability_verdict(specs["U"], an,
                                                [specs["A"], specs["B"]])
        return {"status": "ok", "ratios": ratios, "verdict": verdict,
                "worst_candidate_ratio": wr, "outputs": []}
    try:
        with open(args.spec, "r", encoding="utf-8") as fh:
            spec = FacetSpec.from_json(fh.read())
    except OSError as exc:
        raise ValidationError(f"cannot read facet spec: {exc}")
    summary = {"status": "ok",
               "signed_perimeter": signed_perimeter(spec, an),
               "area": spec.area(),
               "ratio": cheeger_ratio(spec, an),
               "outputs": []}
    if args.candidates:
        cands = []
        for p in args.candidates:
            with open(p, "r", encoding="utf-8") as fh:
                cands.append(FacetSpec.from_json(fh.read()))
        verdict, wi, wr = calibrability_verdict(spec, an, cands)
        summary["verdict"] = verdict
        summary["worst_candidate"] = wi
        summary["worst_candidate_ratio"] = wr
    return summary


def cmd_exact(args):
    kind = args.which
    rows = []
    if kind == "wulff":
        t_star = exact_mod.wulff_extinction_time(args.r0, args.c)
        fn = lambda t: exact_mod.wulff_radius(args.r0, args.c, t)
        summary = {"status": "ok", "extinction_time": t_star}
    elif kind == "rectangle":
        t_star = exact_mod.rectangle_extinction_time(args.a, args.b)
        fn = lambda t: exact_mod.rectangle_scale(args.a, args.b, t)
        summary = {"status": "ok", "extinction_time": t_star}
    elif kind == "staircase":
        v = exact_mod.staircase_facet_speed(args.a, args.b)
        return {"status": "ok", "speed": v, "outputs": []}
    else:  # breaking
        v = exact_mod.breaking_facet_value((args.x, args.y), args.t or 0.0)
        return {"status": "ok", "value": v, "outputs": []}

    outputs = []
    if args.t is not None:
        summary["t"] = args.t
        summary["value"] = fn(args.t)
    if args.table:
        try:
            t0, t1, n = args.table.split(":")
            ts = np.linspace(float(t0), float(t1), int(n))
        except ValueError:
            raise ValidationError("--table wants START:STOP:COUNT")
        rows = [(f"{t:.12g}", f"{fn(t):.12g}") for t in ts]
        if args.csv:
            with open(args.csv, "w", newline="", encoding="utf-8") as fh:
                wr = csv.writer(fh)
                wr.writerow(["t", "value"])
                wr.writerows(rows)
            outputs.append(args.csv)
        else:
            print("t,value")
            for r in rows:
                print(",".join(r))
    summary["outputs"] = outputs
    return summary


def cmd_demo_fattening(args):
    an = load_anisotropy("l1")
    mob = Mobility(an, "sigma")
    s = 1.0
    sq1 = np.array([[0, 0], [s, 0], [s, s], [0, s]], dtype=float)
    sq2 = -sq1
    E0 = EvolvingSet.from_polygons([sq1, sq2])
    opts = ChambolleOptions(spacing=args.spacing, tol=args.tol)
    traj = chambolle_evolve(E0, args.h, args.h * args.steps, an, mob, opts)
    outputs = []
    if args.svg and traj.sets:
        write_svg(args.svg, [st.contours for st in traj.sets])
        outputs.append(args.svg)
    return {"status": traj.status, "steps": len(traj.times) - 1,
            "final_area": traj.areas[-1],
            "initial_area": traj.areas[0],
            "outputs": outputs}


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="crystalflow",
        description="Planar crystalline curvature flow toolkit")
    ap.add_argument("--config", help="JSON config file; flags override it")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("flow", help="polygonal crystalline flow (ODE route)")
    p.add_argument("--anisotropy", default="l1")
    p.add_argument("--law", default="sigma_kappa",
                   choices=["sigma_kappa", "kappa", "eikonal", "power"])
    p.add_argument("--drive", type=float, default=0.0)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--init", default="wulff", help="wulff | rect | polygon JSON path")
    p.add_argument("--weak", action="store_true")
    p.add_argument("--r0", type=float, default=1.0)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--t-end", type=float, default=1.0)
    p.add_argument("--rel-tol", type=float, default=1e-10)
    p.add_argument("--abs-tol", type=float, default=1e-12)
    p.add_argument("--samples", type=int, default=40)
    p.add_argument("--csv")
    p.add_argument("--events")
    p.add_argument("--svg")
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("chambolle", help="minimizing-movement level-set route")
    p.add_argument("--anisotropy", default="l1")
    p.add_argument("--mobility", default="sigma")
    p.add_argument("--init", default="wulff")
    p.add_argument("--r0", type=float, default=1.0)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--h", type=float, default=0.01)
    p.add_argument("--t-end", type=float, default=0.6)
    p.add_argument("--spacing", type=float, default=1.0 / 128.0)
    p.add_argument("--band", type=float, default=None)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--csv")
    p.add_argument("--svg")
    p.set_defaults(func=cmd_chambolle)

    p = sub.add_parser("resolvent", help="one anisotropic TV resolvent solve")
    p.add_argument("--anisotropy", default="l1")
    p.add_argument("--psi", required=True, help="grid file (.bin or .csv)")
    p.add_argument("--spacing", type=float, default=None)
    p.add_argument("--boundary", default="periodic")
    p.add_argument("--origin", type=float, nargs=2, default=(0.0, 0.0))
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iters", type=int, default=20000)
    p.add_argument("--out")
    p.add_argument("--speed-out")
    p.set_defaults(func=cmd_resolvent)

    p = sub.add_parser("lambda", help="closed-form facet curvatures")
    p.add_argument("--kind", required=True,
                   choices=["wulff_facet", "facet_with_hole", "convex_concave"])
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--R", type=float, default=None)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--estimate", action="store_true",
                   help="also estimate on a grid via the resolvent")
    p.add_argument("--anisotropy", default="l1")
    p.add_argument("--grid", type=int, default=192)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_lambda)

    p = sub.add_parser("facet", help="signed perimeter / Cheeger ratios")
    p.add_argument("--spec", required=True,
                   help="facet spec JSON path, or 'breaking' for the built-in example")
    p.add_argument("--anisotropy", default="l1")
    p.add_argument("--candidates", nargs="*", default=[])
    p.set_defaults(func=cmd_facet)

    p = sub.add_parser("exact", help="closed-form reference solutions as CSV")
    p.add_argument("which", choices=["wulff", "rectangle", "staircase", "breaking"])
    p.add_argument("--r0", type=float, default=1.0)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--x", type=float, default=0.0)
    p.add_argument("--y", type=float, default=0.0)
    p.add_argument("--t", type=float, default=None)
    p.add_argument("--table", help="START:STOP:COUNT")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("demo-fattening",
                       help="figure-8 initial curve developing interior")
    p.add_argument("--spacing", type=float, default=1.0 / 96.0)
    p.add_argument("--h", type=float, default=0.01)
    p.add_argument("--steps", type=int, default=8)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--svg")
    p.set_defaults(func=cmd_demo_fattening)

    return ap


def _merge_config(ap: argparse.ArgumentParser, args, argv):
    if not args.config:
        return args
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"bad config file: {exc}")
    known = {k for k in vars(args) if k not in ("func", "command", "config")}
    unknown = set(cfg) - known
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")
    # config fills in everything not explicitly present on the command line
    given = {a.lstrip("-").replace("-", "_").split("=")[0]
             for a in argv if a.startswith("--")}
    for key, val in cfg.items():
        if key not in given:
            setattr(args, key, val)
    return args


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = _build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        args = _merge_config(ap, args, argv)
        summary = args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CrystalflowError, ValueError) as exc:
        kind = type(exc).__name__
        print(f"error ({kind}): {exc}", file=sys.stderr)
        if isinstance(exc, StiffnessFailureError):
            return 3
        return 2
    except SolverFailure as exc:
        print(json.dumps(exc.summary))
        print("error: solver did not converge", file=sys.stderr)
        return 3
    print(json.dumps(summary))
    return 0


if __name__ == "__main__":
    sys.exit(main())
