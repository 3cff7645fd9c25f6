"""Scenario files: JSON schema validation, defaults, and conversion to a :class:`Scenario`.

A scenario document is normalized by filling every optional field with its
default, so ``normalize(json.loads(json.dumps(normalize(doc))))`` equals
``normalize(doc)``.
"""

from __future__ import annotations

import copy
import json
import math
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .control import QuadraticCLF
from .distance import ConvexPolygon
from .ellipse import EllipseShape
from .robots import ArmModel, Disc, GoalRegion, MovingObstacle, ObstacleMotion, UnicycleModel
from .se2 import SE2Pose
from .sim import Scenario

UNICYCLE_V_MAX = 3.0
ARM_OMEGA_MAX = 3.0


class ConfigError(ValueError):
    def __init__(self, pointer: str, message: str):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer or "/"
        self.message = message


def load_schema() -> dict:
    return json.loads(resources.files("safeguard").joinpath("data/scenario.schema.json").read_text())


def bundled_scenarios() -> dict[str, Path]:
    root = resources.files("safeguard").joinpath("data/scenarios")
    return {p.name: Path(str(p)) for p in root.iterdir() if p.name.endswith(".json")}


def _pointer(path) -> str:
    return "".join(f"/{p}" for p in path)


def validate(doc) -> None:
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(doc), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        # report the deepest error, which is the one pointing at the actual field
        err = max(errors, key=lambda e: len(e.absolute_path))
        raise ConfigError(_pointer(err.absolute_path), err.message)


def normalize(doc: dict) -> dict:
    """Validate and return a copy with every default made explicit."""
    validate(doc)
    bad = _first_non_finite(doc)
    if bad is not None:
        raise ConfigError(_pointer(bad), "value must be finite")
    d = copy.deepcopy(doc)
    d.setdefault("name", "scenario")
    robot = d["robot"]
    robot.setdefault("circle_radius", None)
    if robot["kind"] == "unicycle":
        robot.setdefault("input_lower", [-UNICYCLE_V_MAX, -4.0])
        robot.setdefault("input_upper", [UNICYCLE_V_MAX, 4.0])
        n_state, n_input = 3, 2
    else:
        K = len(robot["link_lengths"])
        robot.setdefault("base", [0.0, 0.0])
        if robot.get("input_lower") is None:
            robot["input_lower"] = [-ARM_OMEGA_MAX] * K
        if robot.get("input_upper") is None:
            robot["input_upper"] = [ARM_OMEGA_MAX] * K
        n_state = n_input = K
        if len(robot["initial_state"]) != K:
            raise ConfigError("/robot/initial_state", f"expected {K} joint angles")
    for key in ("input_lower", "input_upper"):
        if len(robot[key]) != n_input:
            raise ConfigError(f"/robot/{key}", f"expected {n_input} entries")
    if any(lo > hi for lo, hi in zip(robot["input_lower"], robot["input_upper"])):
        raise ConfigError("/robot/input_lower", "lower bound exceeds upper bound")

    for i, ob in enumerate(d["obstacles"]):
        ob.setdefault("velocity", [0.0, 0.0])
        ob.setdefault("angular_velocity", 0.0)
        ob.setdefault("segments", [])
        times = [s["t"] for s in ob["segments"]]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ConfigError(f"/obstacles/{i}/segments", "switch times must increase")
        for s in ob["segments"]:
            s.setdefault("angular_velocity", 0.0)

    ctrl = d.setdefault("controller", {})
    ctrl.setdefault("nominal", None)
    if ctrl["nominal"] is None:
        ctrl["nominal"] = [UNICYCLE_V_MAX, 0.0] if robot["kind"] == "unicycle" else [0.0] * n_input
    if len(ctrl["nominal"]) != n_input:
        raise ConfigError("/controller/nominal", f"expected {n_input} entries")
    ctrl.setdefault("use_clf", True)
    ctrl.setdefault("Q", None)
    ctrl.setdefault("x_star", None)
    ctrl.setdefault("gamma_v", 2.0)
    ctrl.setdefault("gamma_h", 3.0)
    ctrl.setdefault("lambda", 100.0)
    ctrl.setdefault("smooth_min_temperature", None)
    if ctrl["Q"] is None:
        ctrl["Q"] = np.eye(n_state).tolist()
    if np.shape(ctrl["Q"]) != (n_state, n_state):
        raise ConfigError("/controller/Q", f"expected a {n_state}x{n_state} matrix")

    goal = d["goal"]
    goal.setdefault("center", None)
    if ctrl["x_star"] is None:
        if robot["kind"] == "arm":
            raise ConfigError("/controller/x_star", "the arm needs a desired joint state")
        if goal["center"] is None:
            raise ConfigError("/goal/center", "give a goal center or a desired state")
        ctrl["x_star"] = [*goal["center"], robot["initial_state"][2]]
    if len(ctrl["x_star"]) != n_state:
        raise ConfigError("/controller/x_star", f"expected {n_state} entries")
    if goal["center"] is None:
        goal["center"] = _model(robot).position(np.asarray(ctrl["x_star"], dtype=float)).tolist()

    sim = d.setdefault("sim", {})
    sim.setdefault("dt", 0.01)
    sim.setdefault("t_max", 30.0)
    sim.setdefault("seed", 0)
    sim.setdefault("intra_checks", 0)
    return d


def _model(robot: dict, shape: str = "se2"):
    if robot["kind"] == "unicycle":
        try:
            poly = ConvexPolygon(robot["vertices"])
        except ValueError as exc:
            raise ConfigError("/robot/vertices", str(exc)) from None
        if shape == "circle":
            r = robot["circle_radius"] or poly.bounding_radius
            return UnicycleModel(Disc(r))
        return UnicycleModel(poly)
    links = robot["link_lengths"]
    shapes = None
    if shape == "circle":
        # one disc per link, centered mid-link, covering it end to end
        shapes = [Disc(robot["circle_radius"] or 0.5 * L, (0.5 * L, 0.0)) for L in links]
    return ArmModel(links, robot["base"], shapes)


def build(doc: dict, shape: str = "se2", overrides: dict | None = None) -> Scenario:
    """Scenario object from a normalized document.

    ``shape`` selects the exact robot geometry ("se2") or its disc cover
    ("circle").  ``overrides`` maps dotted keys such as ``"sim.dt"`` to values.
    """
    d = copy.deepcopy(doc)
    for key, value in (overrides or {}).items():
        section, field = key.split(".")
        d.setdefault(section, {})[field] = value
    d = normalize(d)
    robot, ctrl, sim = d["robot"], d["controller"], d["sim"]
    model = _model(robot, shape)
    obstacles = [
        MovingObstacle(
            EllipseShape(ob["a"], ob["b"]),
            ObstacleMotion(
                SE2Pose.from_xytheta(*ob["pose"]),
                ob["velocity"],
                ob["angular_velocity"],
                tuple((s["t"], s["velocity"], s["angular_velocity"]) for s in ob["segments"]),
            ),
        )
        for ob in d["obstacles"]
    ]
    clf = None
    if ctrl["use_clf"]:
        try:
            clf = QuadraticCLF(ctrl["Q"], ctrl["x_star"], ctrl["gamma_v"], model.angle_mask)
        except ValueError as exc:
            raise ConfigError("/controller/Q", str(exc)) from None
    scenario = Scenario(
        model=model,
        x0=np.asarray(robot["initial_state"], dtype=float),
        obstacles=obstacles,
        goal=GoalRegion(d["goal"]["center"], d["goal"]["radius"]),
        nominal=np.asarray(ctrl["nominal"], dtype=float),
        clf=clf,
        gamma_h=ctrl["gamma_h"],
        lam=ctrl["lambda"],
        u_lo=np.asarray(robot["input_lower"], dtype=float),
        u_hi=np.asarray(robot["input_upper"], dtype=float),
        dt=sim["dt"],
        t_max=sim["t_max"],
        intra_checks=sim["intra_checks"],
        smooth_min_temperature=ctrl["smooth_min_temperature"],
        seed=sim["seed"],
        name=d["name"],
    )
    for i, b in enumerate(scenario.barriers):
        ev = b.evaluate(scenario.x0, 0.0)
        if ev.penetrating or ev.h <= 0.0:
            raise ConfigError(f"/obstacles/{i}", "robot overlaps this obstacle at t = 0")
    return scenario


def load(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("/", f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("/", f"invalid JSON: {exc}") from None
    return normalize(doc)


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _first_non_finite(doc, path=()):
    if isinstance(doc, dict):
        items = doc.items()
    elif isinstance(doc, list):
        items = enumerate(doc)
    else:
        return path if isinstance(doc, float) and not math.isfinite(doc) else None
    for k, v in items:
        bad = _first_non_finite(v, path + (k,))
        if bad is not None:
            return bad
    return None
