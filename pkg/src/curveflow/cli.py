"""Command-line front end.

Every run writes its artifacts into an output directory together with a
manifest.json echoing the configuration, the package version, and a summary
of the residuals the command produced.  Exit codes: 0 ok, 2 validation
error, 3 numerical failure.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .curves import (load_curve, make_circle, make_helix, make_line,
                     make_perturbed_circle, export_polyline, save_curve)
from .darboux import darboux_transform, scan_to_csv, spectral_image_scan
from .errors import (ArgumentError, NumericalError, SingularSectorError,
                     ValidationError)
from .flows import (FlowSpec, commutator_defect, evolve, export_trajectory,
                    max_relative_drift)
from .frames import (hamiltonians_from_angle, monodromy_angle_scan,
                     spherical_sector_area, gauss_bonnet_residual)
from .functionals import energy, energy_report
from .hierarchy import fit_multipliers
from .loops import (LoopElement, lax_evolve, load_loop, save_loop,
                    spectral_polynomial)

_CURVE_KEYS = {
    "circle": {"r", "n"},
    "helix": {"a", "b", "turns", "n"},
    "line": {"length", "n"},
    "perturbed-circle": {"r", "n", "amplitude", "modes", "seed"},
}


def thread_count():
    """Parallelism cap from CURVEFLOW_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("CURVEFLOW_THREADS", "1")))
    except ValueError:
        raise ArgumentError("CURVEFLOW_THREADS must be an integer")


def parse_curve(spec, seed=0):
    """Builtin spec like 'circle:r=1,n=256' or a path to a curve JSON file."""
    if ":" not in spec or os.path.exists(spec):
        return load_curve(spec)
    name, _, rest = spec.partition(":")
    if name not in _CURVE_KEYS:
        raise ArgumentError("unknown builtin curve %r (choices: %s)"
                            % (name, ", ".join(sorted(_CURVE_KEYS))))
    params = {}
    for item in rest.split(","):
        if not item:
            continue
        key, sep, val = item.partition("=")
        if not sep:
            raise ArgumentError("curve parameter %r is not key=value" % item)
        if key not in _CURVE_KEYS[name]:
            raise ArgumentError("unknown parameter %r for curve %r"
                                % (key, name))
        params[key] = val
    try:
        if name == "circle":
            return make_circle(float(params.get("r", 1.0)),
                               int(params.get("n", 256)))
        if name == "helix":
            return make_helix(float(params.get("a", 1.0)),
                              float(params.get("b", 1.0)),
                              float(params.get("turns", 1.0)),
                              int(params.get("n", 256)))
        if name == "line":
            return make_line(float(params.get("length", 2.0 * np.pi)),
                             int(params.get("n", 256)))
        modes = tuple(int(m) for m in params.get("modes", "2+3").split("+"))
        return make_perturbed_circle(float(params.get("r", 1.0)),
                                     int(params.get("n", 256)),
                                     float(params.get("amplitude", 0.05)),
                                     modes=modes,
                                     seed=int(params.get("seed", seed)))
    except ValueError as e:
        raise ArgumentError("bad curve parameter value: %s" % e)


def parse_weights(text):
    """'1' or '1=2,2=0.5' -> {k: weight}."""
    out = {}
    for item in text.split(","):
        key, sep, val = item.partition("=")
        try:
            out[int(key)] = float(val) if sep else 1.0
        except ValueError:
            raise ArgumentError("bad flow weight %r" % item)
    return out


def parse_axis(text):
    try:
        axis = np.array([float(c) for c in text.split(",")])
    except ValueError:
        raise ArgumentError("axis must be comma-separated numbers")
    if axis.shape != (3,):
        raise ArgumentError("axis must have three components")
    return axis / np.linalg.norm(axis)


def write_manifest(outdir, args, summary):
    os.makedirs(outdir, exist_ok=True)
    config = {k: v for k, v in vars(args).items() if k != "func"}
    manifest = {"version": __version__, "config": config, "summary": summary}
    with open(os.path.join(outdir, "manifest.json"), "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True, default=str)


def cmd_flow(args):
    curve = parse_curve(args.curve, seed=args.seed)
    axis = parse_axis(args.axis) if args.axis else None
    spec = FlowSpec(parse_weights(args.flow), args.dt, args.steps,
                    integrator=args.integrator,
                    resample_every=args.resample_every)
    traj = evolve(curve, spec, axis=axis)
    export_trajectory(traj, args.out, axis=axis)
    drifts = {"E_%d" % k: max_relative_drift(traj, k)
              for k in traj.energy_log[0].values}
    write_manifest(args.out, args, {"drifts": drifts,
                                    "snapshots": len(traj.snapshots)})
    return 0


def cmd_energies(args):
    curve = parse_curve(args.curve, seed=args.seed)
    axis = parse_axis(args.axis) if args.axis else None
    rep = energy_report(curve, axis=axis)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "energies.csv"), "w") as f:
        f.write("k,value,axis,torsion_branch\n")
        f.write(rep.csv_rows())
    write_manifest(args.out, args,
                   {"values": {"E_%d" % k: v for k, v in rep.values.items()}})
    return 0


def cmd_conserve(args):
    curve = parse_curve(args.curve, seed=args.seed)
    axis = parse_axis(args.axis) if args.axis else None
    spec = FlowSpec(parse_weights(args.flow), args.dt, args.steps)
    traj = evolve(curve, spec, axis=axis)
    drifts = {k: max_relative_drift(traj, k)
              for k in traj.energy_log[0].values}
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "drifts.csv"), "w") as f:
        f.write("k,max_relative_drift\n")
        for k in sorted(drifts):
            f.write("%d,%.17g\n" % (k, drifts[k]))
    worst = max(drifts.values())
    write_manifest(args.out, args,
                   {"drifts": {"E_%d" % k: v for k, v in drifts.items()},
                    "worst": worst})
    return 0


def cmd_commute(args):
    curve = parse_curve(args.curve, seed=args.seed)
    pairs = []
    for item in args.pairs.split(";"):
        i, sep, j = item.partition(",")
        if not sep:
            raise ArgumentError("pairs must look like '1,2;1,3'")
        pairs.append((int(i), int(j)))
    rows = []
    for i, j in pairs:
        d1 = commutator_defect(curve, i, j, args.dt)
        d2 = commutator_defect(curve, i, j, args.dt / 2.0)
        factor = d1 / d2 if d2 > 0 else float("inf")
        rows.append((i, j, d1, d2, factor))
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "defects.csv"), "w") as f:
        f.write("i,j,defect_dt,defect_half_dt,factor\n")
        for r in rows:
            f.write("%d,%d,%.17g,%.17g,%.17g\n" % r)
    write_manifest(args.out, args,
                   {"factors": {"%d,%d" % (i, j): fac
                                for i, j, _, _, fac in rows}})
    return 0


def cmd_lax(args):
    if args.loop:
        xi = load_loop(args.loop)
    else:
        rng = np.random.default_rng(args.seed)
        xi = LoopElement(rng.standard_normal((args.degree + 1, 3)))
    weights = parse_weights(args.flow)
    snaps = lax_evolve(xi, weights, args.dt, args.steps)
    p0 = spectral_polynomial(snaps[0]).coeffs
    drift = max(np.abs(spectral_polynomial(s).coeffs - p0).max()
                for s in snaps)
    os.makedirs(args.out, exist_ok=True)
    save_loop(snaps[-1], os.path.join(args.out, "final_loop.json"))
    with open(os.path.join(args.out, "spectral_drift.csv"), "w") as f:
        f.write("snapshot,max_coefficient_drift\n")
        for i, s in enumerate(snaps):
            d = np.abs(spectral_polynomial(s).coeffs - p0).max()
            f.write("%d,%.17g\n" % (i, d))
    write_manifest(args.out, args, {"max_spectral_drift": drift})
    return 0


def cmd_angle_scan(args):
    curve = parse_curve(args.curve, seed=args.seed)
    grid = np.geomspace(args.lmin, args.lmax, args.count)
    scan = monodromy_angle_scan(curve, grid)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "angles.csv"), "w") as f:
        f.write("lambda,theta,axis_x,axis_y,axis_z,area,gauss_bonnet_residual\n")
        for m in scan:
            try:
                area = spherical_sector_area(curve, m.lam)
                res = gauss_bonnet_residual(curve, m.lam)
                tail = "%.17g,%.17g" % (area, res)
            except SingularSectorError:
                tail = ","
            ax = m.axis if m.axis is not None else (np.nan,) * 3
            f.write("%.17g,%.17g,%.17g,%.17g,%.17g,%s\n"
                    % (m.lam, m.theta, ax[0], ax[1], ax[2], tail))
    summary = {}
    if args.fit:
        es = hamiltonians_from_angle(curve, lambda_grid=grid, kmax=args.fit)
        summary["fitted"] = {"E_%d" % k: float(v) for k, v in enumerate(es)}
    write_manifest(args.out, args, summary)
    return 0


def _parse_grid(text):
    try:
        lo, hi, count = text.split(":")
        return np.linspace(float(lo), float(hi), int(count))
    except ValueError:
        raise ArgumentError("grid must look like 'lo:hi:count'")


def cmd_spectral_scan(args):
    curve = parse_curve(args.curve, seed=args.seed)
    res = _parse_grid(args.re)
    ims = _parse_grid(args.im)
    rows = spectral_image_scan(curve, res, ims, threads=thread_count())
    os.makedirs(args.out, exist_ok=True)
    scan_to_csv(rows, os.path.join(args.out, "spectral_scan.csv"))
    flagged = sum(int(r["parabolic"]) for r in rows)
    write_manifest(args.out, args,
                   {"samples": len(rows), "branch_points_flagged": flagged})
    return 0


def cmd_darboux(args):
    curve = parse_curve(args.curve, seed=args.seed)
    lam = complex(args.lam.replace("i", "j"))
    os.makedirs(args.out, exist_ok=True)
    meta = {"lambda": [lam.real, lam.imag]}
    e0 = {k: energy(k, curve) for k in (1, 2, 3)}
    for sign, tag in (("+", "plus"), ("-", "minus")):
        result = darboux_transform(curve, lam, sign=sign)
        export_polyline(result.raw_points,
                        os.path.join(args.out, "eta_%s.csv" % tag))
        save_curve(result.curve,
                   os.path.join(args.out, "eta_%s.json" % tag))
        meta["eta_%s" % tag] = {
            "distance": result.distance,
            "pre_resample_deviation": result.pre_resample_deviation,
            "energy_deltas": {"E_%d" % k: energy(k, result.curve) - e0[k]
                              for k in (1, 2, 3)},
        }
    with open(os.path.join(args.out, "darboux.json"), "w") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
    write_manifest(args.out, args, meta)
    return 0


def cmd_criticality(args):
    curve = parse_curve(args.curve, seed=args.seed)
    fit = fit_multipliers(curve, args.k)
    summary = {"multipliers": [float(c) for c in fit.coefficients],
               "axis_term": [float(c) for c in fit.axis_term],
               "residual": fit.residual}
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "criticality.json"), "w") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
    write_manifest(args.out, args, summary)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="curveflow",
        description="Hamiltonian flows of space curves with monodromy")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, name):
        p.add_argument("--curve", required=True,
                       help="builtin spec (e.g. circle:r=1,n=256) or JSON path")
        p.add_argument("--out", default=os.path.join("runs", name))
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("flow", help="evolve a curve and export the trajectory")
    common(p, "flow")
    p.add_argument("--flow", required=True, help="weights, e.g. '1' or '1=1,2=0.5'")
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--axis", default=None)
    p.add_argument("--integrator", choices=("rk4", "midpoint", "euler"),
                   default="rk4")
    p.add_argument("--resample-every", type=int, default=0)
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("energies", help="all E_k of a curve as CSV")
    common(p, "energies")
    p.add_argument("--axis", default=None)
    p.set_defaults(func=cmd_energies)

    p = sub.add_parser("conserve", help="energy drift along a flow")
    common(p, "conserve")
    p.add_argument("--flow", required=True)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--axis", default=None)
    p.set_defaults(func=cmd_conserve)

    p = sub.add_parser("commute", help="flow-composition defects and scaling")
    common(p, "commute")
    p.add_argument("--pairs", default="1,2;1,3;2,3")
    p.add_argument("--dt", type=float, default=1e-3)
    p.set_defaults(func=cmd_commute)

    p = sub.add_parser("lax", help="isospectral loop-algebra evolution")
    p.add_argument("--loop", default=None, help="loop JSON path")
    p.add_argument("--degree", type=int, default=3,
                   help="degree of a random loop when --loop is omitted")
    p.add_argument("--flow", default="0", help="V_k weights")
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--out", default=os.path.join("runs", "lax"))
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_lax)

    p = sub.add_parser("angle-scan", help="monodromy angle over a lambda grid")
    common(p, "angle-scan")
    p.add_argument("--lmin", type=float, default=8.0)
    p.add_argument("--lmax", type=float, default=64.0)
    p.add_argument("--count", type=int, default=32)
    p.add_argument("--fit", type=int, default=0,
                   help="fit E_0..E_k from the scan (0 = no fit)")
    p.set_defaults(func=cmd_angle_scan)

    p = sub.add_parser("spectral-scan",
                       help="ideal fixed points over a complex lambda grid")
    common(p, "spectral-scan")
    p.add_argument("--re", default="0.5:2:8", help="grid lo:hi:count")
    p.add_argument("--im", default="0.1:1:8", help="grid lo:hi:count")
    p.set_defaults(func=cmd_spectral_scan)

    p = sub.add_parser("darboux", help="Darboux transform pair at complex lambda")
    common(p, "darboux")
    p.add_argument("--lam", "--lambda", dest="lam", required=True,
                   help="complex value, e.g. '0.5+2i'")
    p.set_defaults(func=cmd_darboux)

    p = sub.add_parser("criticality", help="fit Y_k against lower flows")
    common(p, "criticality")
    p.add_argument("--k", type=int, default=3)
    p.set_defaults(func=cmd_criticality)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as e:
        print("error: %s" % e, file=sys.stderr)
        return 2
    except NumericalError as e:
        outdir = getattr(args, "out", ".")
        os.makedirs(outdir, exist_ok=True)
        with open(os.path.join(outdir, "diagnostics.json"), "w") as f:
            json.dump({"error": type(e).__name__, "message": str(e)}, f,
                      indent=2)
        print("numerical failure: %s" % e, file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
