"""Command-line front end for the curved-ray pipeline.

Subcommands: bake-profile, build-mesh, trace, step-trace, analyze, bench.
Every run is reproducible from its inputs, flags, and seed.  Exit codes:
0 success, 2 usage error, 3 missing input file, 4 format or version
mismatch, 5 computation error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import analysis, formats, media
from .mesh import (BoundaryScene, OutsideDomainError, MeshError,
                   ResampleParams, build_adaptive_mesh, link_boundary)
from .stepper import ConvergenceError, MeshMedia, StepperConfig, step_trace
from .traversal import TraceConfig, fan_directions, trace

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_MISSING = 3
EXIT_FORMAT = 4
EXIT_COMPUTE = 5


def _parser():
    top = argparse.ArgumentParser(prog="curvtrace", description=__doc__)
    top.add_argument("--config", help="JSON file of defaults (flags win)")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bake-profile", help="sample an analytic profile onto a grid")
    p.add_argument("--kind", help="catalog profile name (e.g. a-lu, a-lu-f, v-im)")
    p.add_argument("--profile", help="profile description JSON instead of --kind")
    p.add_argument("--seed", type=int, default=0, help="fluctuation phase seed")
    p.add_argument("--amplitude", type=float, help="fluctuation amplitude override")
    p.add_argument("--band", type=float, nargs=2, help="fluctuation wavelength band [m]")
    p.add_argument("--modes", type=int, default=8, help="fluctuation mode count")
    p.add_argument("--dims", type=int, nargs=3, default=[64, 64, 64])
    p.add_argument("--origin", type=float, nargs=3, default=[0.0, 0.0, 0.0])
    p.add_argument("--spacing", type=float, nargs=3, default=[2.5, 2.5, 2.5])
    p.add_argument("--quantity", choices=("c", "n", "n2"), default="c")
    p.add_argument("--encoding", choices=("binary", "text"), default="binary")
    p.add_argument("--out", required=True, help="output grid file")
    p.add_argument("--profile-out", help="also write the profile description JSON")

    p = sub.add_parser("build-mesh", help="resample a grid and tetrahedralize")
    p.add_argument("--grid", required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--d-min", type=float)
    p.add_argument("--d-max", type=float)
    p.add_argument("--grading", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--boundary", choices=("clamp", "discard"), default="clamp")
    p.add_argument("--gradient-method", choices=("regression", "green_gauss"),
                   default="regression")
    p.add_argument("--scene", help="triangle soup to link")
    p.add_argument("--out", required=True, help="mesh cache (.npz)")

    p = sub.add_parser("trace", help="curved-ray traversal of a mesh")
    p.add_argument("--mesh", required=True)
    p.add_argument("--scene", help="link a scene before tracing")
    p.add_argument("--origin", type=float, nargs=3, required=True)
    p.add_argument("--direction", type=float, nargs=3, help="single ray direction")
    p.add_argument("--fan", type=int, help="number of fan rays")
    p.add_argument("--fan-span", type=float, nargs=2, default=[-60.0, 60.0],
                   help="fan elevation range [deg]")
    p.add_argument("--azimuth", type=float, default=0.0)
    p.add_argument("--depth", type=int, default=8, help="max reflections")
    p.add_argument("--max-travel", type=float, default=math.inf)
    p.add_argument("--samples-per-segment", type=int, default=8)
    p.add_argument("--out", required=True, help="CSV polyline output")
    p.add_argument("--json-out", help="full JSON path records")
    p.add_argument("--npz-out", help="compact binary path records")
    p.add_argument("--events-out", help="CSV of boundary events")

    p = sub.add_parser("step-trace", help="piecewise-linear reference stepping")
    p.add_argument("--grid", help="media grid file (trilinear source)")
    p.add_argument("--profile", help="profile description JSON (analytic source)")
    p.add_argument("--quantity", choices=("c", "n", "n2"),
                   help="integration quantity (defaults to the source's)")
    p.add_argument("--bounds", type=float, nargs=6,
                   help="domain box lo(x y z) hi(x y z); required with --profile")
    p.add_argument("--origin", type=float, nargs=3, required=True)
    p.add_argument("--direction", type=float, nargs=3)
    p.add_argument("--fan", type=int)
    p.add_argument("--fan-span", type=float, nargs=2, default=[-60.0, 60.0])
    p.add_argument("--azimuth", type=float, default=0.0)
    p.add_argument("--ds", type=float, default=1.0)
    p.add_argument("--integrator", choices=("euler", "rk4"), default="rk4")
    p.add_argument("--converge", type=float,
                   help="halve ds until hit points settle within this [m]")
    p.add_argument("--scene")
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--store-every", type=int, default=8)
    p.add_argument("--out", required=True)
    p.add_argument("--json-out")

    p = sub.add_parser("analyze", help="error analysis of a mesh or ray sets")
    p.add_argument("--interp-error", action="store_true")
    p.add_argument("--sigma-sweep", type=float, nargs="+",
                   help="sigmas for a refinement sweep")
    p.add_argument("--ray-error", action="store_true",
                   help="compare --paths against --truth (JSON path files)")
    p.add_argument("--grid")
    p.add_argument("--mesh")
    p.add_argument("--profile", help="analytic truth profile for the sweep")
    p.add_argument("--d-max", type=float)
    p.add_argument("--grading", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--origin", type=float, nargs=3, default=[10.0, 10.0, 60.0])
    p.add_argument("--fan", type=int, default=60)
    p.add_argument("--fan-span", type=float, nargs=2, default=[-15.0, 60.0])
    p.add_argument("--azimuths", type=float, nargs="+", default=[15.0, 45.0, 75.0])
    p.add_argument("--paths")
    p.add_argument("--truth")
    p.add_argument("--slice-axis", choices=("x", "y", "z"))
    p.add_argument("--slice-index", type=int)
    p.add_argument("--slice-out", help="CSV heat-map slice of the error field")
    p.add_argument("--out", help="JSON report")
    p.add_argument("--csv-out", help="CSV table (sweep rows)")

    p = sub.add_parser("bench", help="equal-accuracy benchmark vs Euler stepping")
    p.add_argument("--grid", required=True)
    p.add_argument("--mesh", required=True)
    p.add_argument("--origin", type=float, nargs=3, required=True)
    p.add_argument("--fan", type=int, default=200)
    p.add_argument("--fan-span", type=float, nargs=2, default=[0.0, 60.0])
    p.add_argument("--azimuth", type=float, default=0.0)
    p.add_argument("--out", help="JSON report")
    p.add_argument("--csv-out")

    for sp in sub.choices.values():
        sp.add_argument("--dump-json", action="store_true",
                        help="print a JSON result summary to stdout")
    return top


def _apply_config(argv, args, parser):
    if args.config:
        try:
            with open(args.config) as f:
                conf = json.load(f)
        except FileNotFoundError:
            raise SystemExit(EXIT_MISSING)
        given = {a.split("=")[0] for a in argv if a.startswith("--")}
        for key, val in conf.items():
            flag = "--" + key
            attr = key.replace("-", "_")
            if flag not in given and hasattr(args, attr):
                setattr(args, attr, val)
    return args


def _load_profile(args):
    if getattr(args, "profile", None):
        return formats.read_profile(args.profile)
    if getattr(args, "kind", None):
        kwargs = {}
        if getattr(args, "amplitude", None) is not None:
            kwargs["fluctuation_amplitude"] = args.amplitude
        if getattr(args, "band", None) is not None:
            kwargs["fluctuation_band"] = tuple(args.band)
        if getattr(args, "modes", None):
            kwargs["fluctuation_modes"] = args.modes
        return media.benchmark_profile(args.kind, seed=args.seed, **kwargs)
    raise SystemExit(EXIT_USAGE)


def _fan_or_single(args):
    if args.direction is not None:
        d = np.asarray(args.direction, dtype=float)
        return [tuple(d / np.linalg.norm(d))]
    if args.fan:
        angles = np.linspace(args.fan_span[0], args.fan_span[1], args.fan)
        return fan_directions(angles, args.azimuth)
    raise SystemExit(EXIT_USAGE)


def _cmd_bake_profile(args):
    profile = _load_profile(args)
    grid = media.bake_grid(profile, args.dims, args.origin, args.spacing,
                           args.quantity)
    formats.write_grid(args.out, grid, args.encoding)
    if args.profile_out:
        formats.write_profile(args.profile_out, profile)
    if args.dump_json:
        print(json.dumps({"out": args.out, "dims": list(grid.dims),
                          "quantity": grid.quantity, "c0": grid.c0}))
    return EXIT_OK


def _cmd_build_mesh(args):
    grid = formats.read_grid(args.grid)
    scene = formats.read_scene(args.scene) if args.scene else None
    params = ResampleParams(sigma=args.sigma, d_min=args.d_min,
                            d_max=args.d_max, grading=args.grading)
    mesh = build_adaptive_mesh(grid, params, scene=scene, seed=args.seed,
                               boundary=args.boundary,
                               gradient_method=args.gradient_method)
    formats.save_mesh(args.out, mesh)
    re_max, re_mean = mesh.radius_edge_stats()
    if args.dump_json:
        print(json.dumps({"out": args.out, "vertices": mesh.n_vertices,
                          "cells": mesh.n_cells, "radius_edge_max": re_max,
                          "radius_edge_mean": re_mean}))
    return EXIT_OK


def _cmd_trace(args):
    mesh = formats.load_mesh(args.mesh)
    if args.scene:
        link_boundary(mesh, formats.read_scene(args.scene))
    cfg = TraceConfig(max_reflections=args.depth, max_travel=args.max_travel)
    paths = []
    hint = None
    for d in _fan_or_single(args):
        try:
            p = trace(mesh, args.origin, d, cfg, hint=hint)
            hint = p.cells[0] if p.cells else None
            paths.append(p)
        except (OutsideDomainError, ValueError) as exc:
            paths.append(exc)
    formats.write_paths_csv(args.out, paths, args.samples_per_segment)
    if args.json_out:
        formats.write_paths_json(args.json_out, paths, args.samples_per_segment)
    if args.npz_out:
        formats.write_paths_npz(args.npz_out, paths, args.samples_per_segment)
    if args.events_out:
        formats.write_events_csv(args.events_out, paths)
    n_err = sum(isinstance(p, Exception) for p in paths)
    if args.dump_json:
        ok = [p for p in paths if not isinstance(p, Exception)]
        print(json.dumps({
            "out": args.out, "rays": len(paths), "errors": n_err,
            "terminations": {t: sum(1 for p in ok if p.termination == t)
                             for t in set(p.termination for p in ok)},
            "mean_cells": float(np.mean([p.meta["cells_traversed"] for p in ok]))
            if ok else 0.0}))
    return EXIT_OK if n_err == 0 else EXIT_COMPUTE


def _cmd_step_trace(args):
    if args.grid:
        src = media.GridMedia(formats.read_grid(args.grid), args.quantity)
        bounds = src.bounds
    elif args.profile:
        prof = formats.read_profile(args.profile)
        src = media.AnalyticMedia(prof, args.quantity)
        if not args.bounds:
            raise SystemExit(EXIT_USAGE)
        bounds = (args.bounds[:3], args.bounds[3:])
    else:
        raise SystemExit(EXIT_USAGE)
    scene = formats.read_scene(args.scene) if args.scene else None
    cfg = StepperConfig(ds=args.ds, integrator=args.integrator,
                        max_reflections=args.depth, store_every=args.store_every)
    paths = []
    for d in _fan_or_single(args):
        if args.converge:
            p, _ = step_trace_converged(src, args.origin, d, args.converge,
                                        cfg, scene, bounds)
        else:
            p = step_trace(src, args.origin, d, cfg, scene=scene, bounds=bounds)
        paths.append(p)
    formats.write_paths_csv(args.out, paths)
    if args.json_out:
        formats.write_paths_json(args.json_out, paths)
    if args.dump_json:
        print(json.dumps({"out": args.out, "rays": len(paths),
                          "integrator": args.integrator, "ds": args.ds}))
    return EXIT_OK


def step_trace_converged(src, origin, d, tol, cfg, scene, bounds):
    from .stepper import converged_trace
    return converged_trace(src, origin, d, tol, cfg=cfg, scene=scene,
                           bounds=bounds)


def _cmd_analyze(args):
    payload = {}
    rows = None
    if args.ray_error:
        if not (args.paths and args.truth):
            raise SystemExit(EXIT_USAGE)
        a = formats.read_paths_json(args.paths)
        b = formats.read_paths_json(args.truth)
        if len(a) != len(b):
            raise SystemExit(EXIT_COMPUTE)
        ha = np.array([r["polyline"][-1] for r in a])
        hb = np.array([r["polyline"][-1] for r in b])
        ta = np.array([r["total_travel"] for r in a])
        tb = np.array([r["total_travel"] for r in b])
        he = np.linalg.norm(ha - hb, axis=1)
        payload["ray_error"] = {
            "n_rays": len(a),
            "hit_err_mean_m": float(he.mean()),
            "hit_err_max_m": float(he.max()),
            "travel_rel_median": float(np.median(np.abs(ta - tb) / tb)),
        }
    if args.interp_error:
        if not (args.grid and args.mesh):
            raise SystemExit(EXIT_USAGE)
        grid = formats.read_grid(args.grid)
        mesh = formats.load_mesh(args.mesh)
        rep = analysis.interpolation_error(grid, mesh)
        payload["interp_error"] = rep.summary()
        if args.slice_out and args.slice_axis:
            _write_slice(args.slice_out, grid, rep.error_field, args.slice_axis,
                         args.slice_index)
    if args.sigma_sweep:
        if not args.grid:
            raise SystemExit(EXIT_USAGE)
        grid = formats.read_grid(args.grid)
        src = media.GridMedia(grid, "c") if not args.profile else \
            media.AnalyticMedia(formats.read_profile(args.profile), "c")
        angles = np.linspace(args.fan_span[0], args.fan_span[1], args.fan)
        kwargs = {"grading": args.grading}
        if args.d_max:
            kwargs["d_max"] = args.d_max
        rows = analysis.sigma_sweep(grid, args.sigma_sweep, src, args.origin,
                                    angles, azimuths=args.azimuths,
                                    resample_kwargs=kwargs, mesh_seed=args.seed)
        payload["sigma_sweep"] = rows
    if not payload:
        raise SystemExit(EXIT_USAGE)
    if args.out:
        formats.write_report_json(args.out, payload)
    if args.csv_out and rows:
        formats.write_sweep_csv(args.csv_out, rows)
    if args.dump_json:
        print(json.dumps(payload, default=float))
    return EXIT_OK


def _write_slice(path, grid, field, axis, index):
    ax = "xyz".index(axis)
    vol = field.reshape(grid.dims)
    if index is None:
        index = grid.dims[ax] // 2
    sl = np.take(vol, index, axis=ax)
    with open(path, "w") as f:
        f.write(f"# slice axis={axis} index={index} dims="
                f"{sl.shape[0]}x{sl.shape[1]}\n")
        f.write("i,j,value\n")
        for i in range(sl.shape[0]):
            for j in range(sl.shape[1]):
                v = sl[i, j]
                f.write(f"{i},{j},{v:.10g}\n" if np.isfinite(v) else f"{i},{j},nan\n")


def _cmd_bench(args):
    grid = formats.read_grid(args.grid)
    mesh = formats.load_mesh(args.mesh)
    src = media.GridMedia(grid, mesh.quantity)
    angles = np.linspace(args.fan_span[0], args.fan_span[1], args.fan)
    rep = analysis.benchmark(mesh, src, args.origin, angles,
                             azimuth_deg=args.azimuth)
    if args.out:
        formats.write_report_json(args.out, rep.summary())
    if args.csv_out:
        formats.write_bench_csv(args.csv_out, rep)
    if args.dump_json:
        print(json.dumps(rep.summary(), default=float))
    return EXIT_OK


_COMMANDS = {
    "bake-profile": _cmd_bake_profile,
    "build-mesh": _cmd_build_mesh,
    "trace": _cmd_trace,
    "step-trace": _cmd_step_trace,
    "analyze": _cmd_analyze,
    "bench": _cmd_bench,
}


def run(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0,) else 0
    try:
        args = _apply_config(argv, args, parser)
        return _COMMANDS[args.command](args)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else EXIT_USAGE
        return code
    except FileNotFoundError as exc:
        print(f"curvtrace: missing file: {exc.filename}", file=sys.stderr)
        return EXIT_MISSING
    except formats.FormatError as exc:
        print(f"curvtrace: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except (MeshError, OutsideDomainError, ConvergenceError, ValueError) as exc:
        print(f"curvtrace: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
