"""Command line front end: ``safeguard run | grid | compare``.

Exit codes: 0 goal reached with positive clearance throughout, 1 bad
configuration, 2 safety violation, 3 goal not reached by ``t_max``.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import config
from .config import ConfigError
from .contour import marching_squares
from .distance import ConvexPolygon
from .robots import ArmModel
from .se2 import SE2Pose
from .sim import Scenario, TrajectoryLog, grid_evaluate, run
from .svg import SvgCanvas

log = logging.getLogger("safeguard")

EXIT_OK, EXIT_CONFIG, EXIT_UNSAFE, EXIT_TIMEOUT = 0, 1, 2, 3
LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "warning": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}


def fmt(v) -> str:
    return format(float(v), ".17g")


def write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def exit_code(summary: dict) -> int:
    min_h = summary["min_h"]
    if summary["violations"] > 0 or (min_h is not None and min_h <= 0.0):
        return EXIT_UNSAFE
    if not summary["goal_reached"]:
        return EXIT_TIMEOUT
    return EXIT_OK


def _names(scenario: Scenario):
    if isinstance(scenario.model, ArmModel):
        K = scenario.model.n_state
        return [f"theta_{i + 1}" for i in range(K)], [f"omega_{i + 1}" for i in range(K)]
    return ["x", "y", "theta"], ["v", "omega"]


def trajectory_csv(lg: TrajectoryLog, scenario: Scenario) -> str:
    xs, us = _names(scenario)
    N = len(scenario.obstacles)
    header = ["t", *xs, *us, "delta", "V", *[f"h_{i + 1}" for i in range(N)], *[f"cbc_{i + 1}" for i in range(N)], "qp_status"]
    lines = [",".join(header)]
    for r in lg.rows:
        vals = [r.t, *r.state, *r.u, r.delta, r.V, *r.h, *r.cbc]
        lines.append(",".join(fmt(v) for v in vals) + "," + r.status.value)
    return "\n".join(lines) + "\n"


def _json_num(v):
    if v is None or not math.isfinite(v):
        return None
    return v


def summary_dict(lg: TrajectoryLog, scenario: Scenario, runtime: float) -> dict:
    s = lg.summary()
    return {
        "scenario": scenario.name,
        "goal_reached": s["goal_reached"],
        "t_goal": s["t_goal"],
        "min_h": _json_num(s["min_h"]),
        "violations": s["violations"],
        "qp_issues": s["qp_issues"],
        "steps": s["steps"],
        "path_length": lg.path_length(scenario.model),
        "runtime": runtime,
    }


def _robot_outlines(scenario: Scenario, x) -> list:
    out = []
    for body in scenario.model.bodies(x):
        if isinstance(body.shape, ConvexPolygon):
            out.append(("poly", body.shape.world_vertices(body.pose)))
        else:
            c = body.pose.q + body.pose.R @ np.asarray(body.shape.center, dtype=float)
            out.append(("disc", (c, body.shape.radius)))
    return out


def frames_svg(lg: TrajectoryLog, scenario: Scenario, n_frames: int = 8) -> str:
    rows = lg.rows
    idx = sorted(set(np.linspace(0, len(rows) - 1, min(n_frames, len(rows))).round().astype(int).tolist()))
    path = np.array([scenario.model.position(r.state) for r in rows])
    pts = [path, scenario.goal.center[None, :] + scenario.goal.radius * np.array([[1, 1], [-1, -1]])]
    for k in idx:
        for ob in scenario.obstacles:
            pts.append(ob.at(rows[k].t).outline(32))
        for kind, geom in _robot_outlines(scenario, rows[k].state):
            pts.append(geom if kind == "poly" else geom[0][None, :] + geom[1] * np.array([[1, 1], [-1, -1]]))
    allp = np.vstack(pts)
    canvas = SvgCanvas(allp[:, 0].min(), allp[:, 0].max(), allp[:, 1].min(), allp[:, 1].max())
    g = scenario.goal
    canvas.circle(g.center[0], g.center[1], g.radius, stroke="green", fill="#cfc", opacity=0.6)
    for n, k in enumerate(idx):
        alpha = 0.25 + 0.75 * (n + 1) / len(idx)
        t = rows[k].t
        for ob in scenario.obstacles:
            e = ob.at(t)
            canvas.ellipse(e.pose.q[0], e.pose.q[1], e.shape.a, e.shape.b, e.pose.theta, stroke="purple", opacity=alpha)
        for kind, geom in _robot_outlines(scenario, rows[k].state):
            if kind == "poly":
                if len(geom) == 2:
                    canvas.polyline(geom, stroke="blue", width=3.0, opacity=alpha)
                else:
                    canvas.polygon(geom, stroke="blue", fill="#9cf", opacity=alpha)
            else:
                canvas.circle(geom[0][0], geom[0][1], geom[1], stroke="blue", fill="#9cf", opacity=alpha)
    canvas.polyline(path, stroke="red", width=1.5)
    canvas.text(allp[:, 0].min(), allp[:, 1].max(), f"{scenario.name}: t = {rows[-1].t:.2f} s")
    return canvas.render()


def write_bundle(out_dir: Path, lg: TrajectoryLog, scenario: Scenario, runtime: float, frames: bool = True) -> dict:
    out_dir = Path(out_dir)
    summary = summary_dict(lg, scenario, runtime)
    write_atomic(out_dir / "trajectory.csv", trajectory_csv(lg, scenario))
    write_atomic(out_dir / "summary.json", json.dumps(summary, indent=2) + "\n")
    if frames and lg.rows:
        write_atomic(out_dir / "frames.svg", frames_svg(lg, scenario))
    return summary


def _overrides(args) -> dict:
    pairs = {
        "dt": "sim.dt",
        "t_max": "sim.t_max",
        "seed": "sim.seed",
        "gamma_h": "controller.gamma_h",
        "gamma_v": "controller.gamma_v",
        "lam": "controller.lambda",
    }
    return {key: getattr(args, attr) for attr, key in pairs.items() if getattr(args, attr, None) is not None}


def _simulate(doc, shape, overrides):
    scenario = config.build(doc, shape, overrides)
    t0 = time.perf_counter()
    lg = run(scenario)
    return scenario, lg, time.perf_counter() - t0


def cmd_run(args) -> int:
    doc = config.load(args.scenario)
    scenario, lg, runtime = _simulate(doc, args.shape, _overrides(args))
    summary = write_bundle(Path(args.out), lg, scenario, runtime, frames=not args.no_frames)
    code = exit_code(summary)
    log.info("%s: goal=%s min_h=%s exit=%d", scenario.name, summary["goal_reached"], summary["min_h"], code)
    print(json.dumps(summary))
    return code


def cmd_compare(args) -> int:
    doc = config.load(args.scenario)
    out = Path(args.out)
    report = {}
    for shape in ("se2", "circle"):
        scenario, lg, runtime = _simulate(doc, shape, _overrides(args))
        s = write_bundle(out / shape, lg, scenario, runtime, frames=not args.no_frames)
        s["exit_code"] = exit_code(s)
        s["safe"] = s["exit_code"] != EXIT_UNSAFE
        report[shape] = s
    # runtime is the only field that differs between identical runs
    comparison = {shape: {k: v for k, v in s.items() if k != "runtime"} for shape, s in report.items()}
    write_atomic(out / "comparison.json", json.dumps(comparison, indent=2, sort_keys=True) + "\n")
    print(json.dumps(comparison))
    return EXIT_OK


def _grid_geometry(doc, args):
    robot = doc["robot"]
    if robot["kind"] != "unicycle":
        raise ConfigError("/robot/kind", "grid evaluation needs a polygon robot (unicycle)")
    if not doc["obstacles"]:
        raise ConfigError("/obstacles", "grid evaluation needs at least one obstacle")
    scenario = config.build(doc)
    polygon = scenario.model.shape
    ellipse = scenario.obstacles[0].at(0.0)
    radius = args.radius
    if radius is None:
        radius = robot["circle_radius"] or polygon.bounding_radius
    extent = args.extent if args.extent is not None else max(ellipse.shape.a, ellipse.shape.b) + 3.0
    n = args.resolution
    cx, cy = ellipse.pose.q
    xs = np.linspace(cx - extent, cx + extent, n)
    ys = np.linspace(cy - extent, cy + extent, n)
    return polygon, ellipse, radius, xs, ys


def grid_csv(xs, ys, Z) -> str:
    lines = ["x,y,value"]
    for iy, y in enumerate(ys):
        for ix, x in enumerate(xs):
            lines.append(f"{fmt(x)},{fmt(y)},{fmt(Z[iy, ix])}")
    return "\n".join(lines) + "\n"


def contour_csv(contours: dict) -> str:
    lines = ["level,line,x,y"]
    for level, polylines in contours.items():
        for k, pl in enumerate(polylines):
            for x, y in pl:
                lines.append(f"{fmt(level)},{k},{fmt(x)},{fmt(y)}")
    return "\n".join(lines) + "\n"


def contour_svg(xs, ys, ellipse, polygon, theta, contours: dict, title: str) -> str:
    canvas = SvgCanvas(xs[0], xs[-1], ys[0], ys[-1], width=600)
    canvas.ellipse(ellipse.pose.q[0], ellipse.pose.q[1], ellipse.shape.a, ellipse.shape.b, ellipse.pose.theta, stroke="purple", fill="#ecf")
    colors = ["#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd"]
    for n, (level, polylines) in enumerate(contours.items()):
        for pl in polylines:
            canvas.polyline(pl, stroke=colors[n % len(colors)], width=1.5)
    # a sample robot pose in a corner, for scale and heading
    corner = SE2Pose(np.array([xs[0] + 1.2, ys[-1] - 1.2]), theta)
    canvas.polygon(polygon.world_vertices(corner), stroke="teal", fill="#9ee")
    canvas.text(xs[0], ys[0], title)
    return canvas.render()


def cmd_grid(args) -> int:
    doc = config.load(args.scenario)
    polygon, ellipse, radius, xs, ys = _grid_geometry(doc, args)
    Z = grid_evaluate(polygon, ellipse, xs, ys, args.theta, args.mode, radius)
    out = Path(args.out)
    write_atomic(out, grid_csv(xs, ys, Z))
    if args.levels:
        levels = [float(v) for v in args.levels.split(",") if v.strip()]
        contours = {lv: marching_squares(xs, ys, Z, lv) for lv in levels}
        stem = out.with_suffix("")
        write_atomic(stem.parent / f"{stem.name}_contours.csv", contour_csv(contours))
        title = f"{args.mode} distance, heading {args.theta:.3f} rad, levels {args.levels}"
        write_atomic(stem.parent / f"{stem.name}_contours.svg", contour_svg(xs, ys, ellipse, polygon, args.theta, contours, title))
    print(json.dumps({"rows": int(Z.size), "min": float(Z.min()), "max": float(Z.max())}))
    return EXIT_OK


def _positive_int(s):
    v = int(s)
    if v < 2:
        raise argparse.ArgumentTypeError("must be at least 2")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="safeguard", description="Safe navigation among moving ellipses with SE(2) barrier functions.")
    sub = p.add_subparsers(dest="command", required=True)

    def sim_flags(sp):
        sp.add_argument("scenario", help="scenario JSON file")
        sp.add_argument("--out", "-o", default="out", help="output directory (default: out)")
        sp.add_argument("--dt", type=float, help="integration step in seconds, in (0, 0.1]")
        sp.add_argument("--t-max", dest="t_max", type=float, help="time limit in seconds")
        sp.add_argument("--gamma-h", dest="gamma_h", type=float, help="barrier gain")
        sp.add_argument("--gamma-v", dest="gamma_v", type=float, help="Lyapunov gain")
        sp.add_argument("--lambda", dest="lam", type=float, help="slack penalty weight")
        sp.add_argument("--seed", type=int, help="random seed recorded with the scenario")
        sp.add_argument("--no-frames", action="store_true", help="skip frames.svg")

    sp = sub.add_parser("run", help="simulate a scenario and write trajectory.csv, summary.json, frames.svg")
    sim_flags(sp)
    sp.add_argument("--shape", choices=("se2", "circle"), default="se2", help="exact robot shape or its enclosing disc")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("compare", help="run the exact-shape and enclosing-disc controllers side by side")
    sim_flags(sp)
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("grid", help="robot-to-obstacle distance over a grid of positions at a fixed heading")
    sp.add_argument("scenario", help="scenario JSON file (polygon robot; the first obstacle is used)")
    sp.add_argument("--out", "-o", default="grid.csv", help="output CSV (default: grid.csv)")
    sp.add_argument("--theta", type=float, default=0.0, help="robot heading in radians")
    sp.add_argument("--mode", choices=("se2", "circle"), default="se2")
    sp.add_argument("--resolution", type=_positive_int, default=100, help="points per axis")
    sp.add_argument("--radius", type=float, help="disc radius for circle mode (default: scenario circle_radius)")
    sp.add_argument("--extent", type=float, help="half width of the grid around the obstacle center")
    sp.add_argument("--levels", help="comma separated isovalues for contour output, e.g. 0.2,2")
    sp.set_defaults(func=cmd_grid)
    return p


def configure_logging() -> None:
    level = LOG_LEVELS.get(os.environ.get("SAFEGUARD_LOG", "warn").lower(), logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv=None) -> int:
    configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error at {exc.pointer}: {exc.message}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        # scenario dataclass checks (dt range etc.) not caught by the schema
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
