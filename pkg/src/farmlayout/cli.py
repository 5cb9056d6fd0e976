"""``farmlayout`` command line.

Commands: windrose, capacity, evaluate, optimize, flowfield, compare.
Exit codes: 0 success, 2 input error, 3 optimisation failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

from . import __version__
from .aep import capacity_plan, compute_aep, flow_field, grid_for_boundary
from .layoutopt import InitializationFailure, OptimizationFailure, compare_models, optimize
from .problem import (ProblemFile, write_history, write_json, write_layout, write_manifest,
                      write_per_direction)
from .render import flowfield_svg, layout_svg
from .turbine import InvalidInput
from .windrose import bin_time_series, read_time_series, write_rose

log = logging.getLogger("farmlayout")

EXIT_INPUT = 2
EXIT_OPTIM = 3


def _threads(args):
    t = getattr(args, "threads", None)
    if t is None:
        t = int(os.environ.get("FARMLAYOUT_THREADS", "1"))
    return max(1, t)


def _out(args, default):
    out = Path(getattr(args, "out", None) or default)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _layout_or_fail(prob, args):
    if getattr(args, "layout", None):
        from .problem import read_layout
        prob.inputs.append(Path(args.layout))
        return read_layout(args.layout)
    lay = prob.layout()
    if lay is None:
        raise InvalidInput("no layout given: pass --layout or set problem.layout")
    return lay


def cmd_windrose(args, argv):
    t0 = time.perf_counter()
    samples = read_time_series(args.input)
    rose = bin_time_series(samples, args.alpha, args.ref_height, args.hub_height,
                           energy_weighted=args.energy_weighted)
    out = _out(args, ".")
    write_rose(rose, out / "rose.csv")
    dom = rose.dominant()
    summary = {
        "n_samples": len(samples),
        "dominant_center_deg": dom.center_direction,
        "dominant_frequency": dom.frequency,
        "mean_speed_ms": rose.mean_speed(),
    }
    write_json(summary, out / "rose_summary.json")
    print(f"{len(samples)} samples -> {out / 'rose.csv'}")
    print(f"dominant bin {dom.center_direction:g} deg ({dom.frequency:.3f}), "
          f"mean hub speed {rose.mean_speed():.2f} m/s")
    config = {"alpha": args.alpha, "ref_height": args.ref_height, "hub_height": args.hub_height,
              "energy_weighted": args.energy_weighted}
    write_manifest(out, "windrose", [args.input], config, time.perf_counter() - t0,
                   ["rose.csv", "rose_summary.json"], argv)
    return 0


def cmd_capacity(args, argv):
    t0 = time.perf_counter()
    plan = capacity_plan(args.area, args.density, args.rating)
    used = plan["n_turbines"] * args.rating
    needed_area = used / args.density
    print(f"capacity: {plan['capacity']:.2f} MW ({plan['capacity']:.1f} MW)")
    print(f"turbines: {plan['n_turbines']} x {args.rating:g} MW = {used:g} MW")
    print(f"area at {args.density:g} MW/km2 for {used:g} MW: {needed_area:.2f} km2, "
          f"residual {args.area - needed_area:.2f} km2")
    if getattr(args, "out", None):
        out = _out(args, ".")
        write_json({**plan, "installed": used, "area_used_km2": needed_area}, out / "capacity.json")
        write_manifest(out, "capacity", [], vars_config(args), time.perf_counter() - t0,
                       ["capacity.json"], argv)
    return 0


def vars_config(args):
    return {k: v for k, v in vars(args).items() if k not in ("func",) and not callable(v)}


def cmd_evaluate(args, argv):
    t0 = time.perf_counter()
    prob = ProblemFile.load(args.problem)
    spec, rose, wake = prob.turbine(), prob.rose(), prob.wake(args.model)
    pos = _layout_or_fail(prob, args)
    report = compute_aep(pos, spec, rose, wake)
    out = _out(args, ".")
    write_json(report.to_dict(), out / "report.json")
    outputs = ["report.json"]
    if args.per_direction:
        write_per_direction(rose, report, out / "per_direction.csv")
        outputs.append("per_direction.csv")
    if args.render:
        layout_svg(pos, prob.boundary().vertices, out / "layout.svg", spec.rotor_diameter)
        outputs.append("layout.svg")
    print(f"AEP {report.aep:.2f} GWh/yr (gross {report.gross_aep:.2f}), wake loss {100 * report.wake_loss:.2f}%")
    write_manifest(out, "evaluate", prob.inputs, {"wake": vars(wake)}, time.perf_counter() - t0,
                   outputs, argv)
    return 0


def cmd_optimize(args, argv):
    t0 = time.perf_counter()
    prob = ProblemFile.load(args.problem)
    spec, rose, wake, boundary = prob.turbine(), prob.rose(), prob.wake(args.model), prob.boundary()
    cfg = prob.optimizer(n_starts=args.starts, n_iterations=args.iterations, n_sequences=args.sequences,
                         seed=getattr(args, "seed", None), min_spacing=args.min_spacing_d,
                         threads=_threads(args))
    n = prob.data.get("n_turbines")
    res = optimize(spec, rose, boundary, cfg, wake, n_turbines=n)
    out = _out(args, ".")
    write_layout(res.best_layout, out / "best_layout.csv")
    write_json(res.best_report.to_dict(), out / "report.json")
    write_history(res.starts, out / "history.csv")
    starts = [{"start": s.index, "seed": s.seed,
               "aep": s.report.aep if s.report else None,
               "wake_loss": s.report.wake_loss if s.report else None,
               "error": s.error} for s in res.starts]
    write_json({"best_start": res.best_start, "wall_time_s": res.wall_time, "starts": starts},
               out / "starts.json")
    outputs = ["best_layout.csv", "report.json", "history.csv", "starts.json"]
    if args.render:
        layout_svg(res.best_layout, boundary.vertices, out / "layout.svg", spec.rotor_diameter)
        outputs.append("layout.svg")
    r = res.best_report
    print(f"best start {res.best_start}: AEP {r.aep:.2f} GWh/yr, wake loss {100 * r.wake_loss:.2f}% "
          f"({res.wall_time:.1f} s)")
    write_manifest(out, "optimize", prob.inputs, {"optimizer": cfg.to_dict(), "wake": vars(wake)},
                   time.perf_counter() - t0, outputs, argv)
    return 0


def cmd_flowfield(args, argv):
    t0 = time.perf_counter()
    prob = ProblemFile.load(args.problem)
    spec, rose, wake, boundary = prob.turbine(), prob.rose(), prob.wake(args.model), prob.boundary()
    pos = _layout_or_fail(prob, args)
    direction = args.direction
    if direction is None:
        direction = rose.dominant().center_direction
    speed = args.speed
    if speed is None:
        speed = rose.bins[int(direction // 10) % 36].mean_speed
    g = grid_for_boundary(boundary.vertices, args.cell, args.margin)
    grid = flow_field(pos, spec, direction, speed, wake, **g)
    out = _out(args, ".")
    xs, ys = grid.cell_centers()
    with open(out / "flowfield.csv", "w") as fh:
        fh.write("x_m,y_m,speed_ms\n")
        for i, x in enumerate(xs):
            for j, y in enumerate(ys):
                fh.write(f"{float(x)!r},{float(y)!r},{float(grid.speeds[i, j])!r}\n")
    outputs = ["flowfield.csv"]
    if args.render:
        flowfield_svg(grid, out / "flowfield.svg", boundary.vertices, pos)
        outputs.append("flowfield.svg")
    print(f"flow field {grid.nx}x{grid.ny} at {direction:g} deg, {speed:.2f} m/s; "
          f"min {grid.speeds.min():.2f} m/s")
    write_manifest(out, "flowfield", prob.inputs,
                   {"direction": direction, "speed": speed, "grid": g, "wake": vars(wake)},
                   time.perf_counter() - t0, outputs, argv)
    return 0


def cmd_compare(args, argv):
    t0 = time.perf_counter()
    prob = ProblemFile.load(args.problem)
    spec, rose = prob.turbine(), prob.rose()
    pos = _layout_or_fail(prob, args)
    res = compare_models(pos, spec, rose)
    out = _out(args, ".")
    write_json(res, out / "compare.json")
    print(f"Bastankhah {res['aep_bastankhah']:.2f} GWh/yr, Jensen {res['aep_jensen']:.2f} GWh/yr, "
          f"gap {100 * res['relative_gap']:.2f}%")
    write_manifest(out, "compare", prob.inputs, {}, time.perf_counter() - t0, ["compare.json"], argv)
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                        help="worker threads (env FARMLAYOUT_THREADS)")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output directory")
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)

    p = argparse.ArgumentParser(prog="farmlayout", parents=[common], description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("windrose", parents=[common], help="bin a wind time series into a 36-sector rose")
    s.add_argument("input")
    s.add_argument("--ref-height", type=float, default=100.0)
    s.add_argument("--hub-height", type=float, default=150.0)
    s.add_argument("--alpha", type=float, default=0.15)
    s.add_argument("--energy-weighted", action="store_true", help="cubic-mean bin speed")
    s.set_defaults(func=cmd_windrose)

    s = sub.add_parser("capacity", parents=[common], help="installed capacity and turbine count")
    s.add_argument("--area", type=float, required=True, help="km2")
    s.add_argument("--density", type=float, default=3.5, help="MW/km2")
    s.add_argument("--rating", type=float, default=15.0, help="MW per turbine")
    s.set_defaults(func=cmd_capacity)

    def problem_cmd(name, func, help):
        s = sub.add_parser(name, parents=[common], help=help)
        s.add_argument("problem")
        s.add_argument("--model", choices=["jensen", "bastankhah"])
        s.set_defaults(func=func)
        return s

    s = problem_cmd("evaluate", cmd_evaluate, "AEP and wake loss of a layout")
    s.add_argument("--layout")
    s.add_argument("--per-direction", action="store_true")
    s.add_argument("--render", action="store_true")

    s = problem_cmd("optimize", cmd_optimize, "multi-start layout optimisation")
    s.add_argument("--starts", type=int)
    s.add_argument("--iterations", type=int)
    s.add_argument("--sequences", type=int)
    s.add_argument("--min-spacing-d", type=float)
    s.add_argument("--render", action="store_true")

    s = problem_cmd("flowfield", cmd_flowfield, "hub-height flow field for one inflow")
    s.add_argument("--layout")
    s.add_argument("--direction", type=float, help="deg; default dominant rose bin")
    s.add_argument("--speed", type=float, help="m/s; default that bin's mean speed")
    s.add_argument("--cell", type=float, default=100.0)
    s.add_argument("--margin", type=float, default=1000.0)
    s.add_argument("--render", action="store_true")

    s = sub.add_parser("compare", parents=[common], help="Bastankhah vs Jensen AEP on one layout")
    s.add_argument("problem")
    s.add_argument("--layout")
    s.set_defaults(func=cmd_compare)
    return p


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args, argv)
    except (OptimizationFailure, InitializationFailure) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OPTIM
    except (InvalidInput, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
