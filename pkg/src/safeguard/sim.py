"""Fixed-step closed-loop simulation under the CLF-CBF controller.

Each step solves one QP at the sampled state and time, holds the control
over the step, and advances the robot with classical RK4.  Obstacles are
never integrated: their poses are exact functions of time.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .control import QPProblem, QuadraticCLF, TimeVaryingCBF, solve_clf_cbf_qp
from .distance import ConvexPolygon, Ellipse, polygon_ellipse_distance
from .ellipse import AtCenter, closest_point_xy
from .qp import QPStatus
from .robots import GoalRegion, MovingObstacle
from .se2 import SE2Pose, to_frame

log = logging.getLogger(__name__)


@dataclass
class Scenario:
    model: object
    x0: np.ndarray
    obstacles: list[MovingObstacle]
    goal: GoalRegion
    nominal: np.ndarray | Callable = None
    clf: QuadraticCLF | None = None
    gamma_h: float = 3.0
    lam: float = 100.0
    u_lo: np.ndarray | None = None
    u_hi: np.ndarray | None = None
    dt: float = 0.01
    t_max: float = 30.0
    intra_checks: int = 0
    smooth_min_temperature: float | None = None
    seed: int = 0
    name: str = "scenario"

    def __post_init__(self):
        if not 0.0 < self.dt <= 0.1:
            raise ValueError("dt must lie in (0, 0.1]")
        if not self.t_max > 0.0:
            raise ValueError("t_max must be positive")
        self.x0 = np.asarray(self.x0, dtype=float)
        if self.nominal is None:
            self.nominal = np.zeros(self.model.n_input)
        self.barriers = [
            TimeVaryingCBF(self.model, ob, self.gamma_h, self.smooth_min_temperature) for ob in self.obstacles
        ]

    def nominal_at(self, x, t) -> np.ndarray:
        if callable(self.nominal):
            return np.asarray(self.nominal(x, t), dtype=float)
        return np.asarray(self.nominal, dtype=float)


@dataclass
class LogRow:
    t: float
    state: np.ndarray
    u: np.ndarray
    delta: float
    V: float
    h: list[float]
    cbc: list[float]
    status: QPStatus
    active_set: list[str]
    min_margin: float
    penetrating: bool = False
    small_lgh: bool = False
    intra_min_h: float = math.inf


@dataclass
class TrajectoryLog:
    rows: list[LogRow] = field(default_factory=list)
    goal_reached: bool = False
    t_goal: float | None = None

    def append(self, row: LogRow):
        self.rows.append(row)

    @property
    def min_h(self) -> float:
        return min((min(r.h, default=math.inf) for r in self.rows), default=math.inf)

    @property
    def violations(self) -> int:
        return sum(1 for r in self.rows if r.penetrating or min(r.h, default=math.inf) <= 0.0)

    @property
    def qp_issues(self) -> int:
        return sum(1 for r in self.rows if r.status is not QPStatus.OPTIMAL)

    def path_length(self, model) -> float:
        pts = np.array([model.position(r.state) for r in self.rows])
        if len(pts) < 2:
            return 0.0
        return float(np.sum(np.hypot(*np.diff(pts, axis=0).T)))

    def summary(self) -> dict:
        return {
            "goal_reached": self.goal_reached,
            "t_goal": self.t_goal,
            "min_h": self.min_h,
            "violations": self.violations,
            "qp_issues": self.qp_issues,
            "steps": len(self.rows),
        }


def rk4(dynamics, x, u, dt):
    k1 = dynamics(x, u)
    k2 = dynamics(x + 0.5 * dt * k1, u)
    k3 = dynamics(x + 0.5 * dt * k2, u)
    k4 = dynamics(x + dt * k3, u)
    return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def control_step(scenario: Scenario, x, t):
    """Solve the QP at (x, t); returns (solution, barrier evaluations, V)."""
    model = scenario.model
    evals = [b.evaluate(x, t) for b in scenario.barriers]
    k = scenario.nominal_at(x, t)
    clc = V = None
    if scenario.clf is not None:
        clc = scenario.clf.clc_terms(x, model.f(x), model.g(x))
        V = scenario.clf.value(x)
    problem = QPProblem(k, scenario.lam, clc, [e.terms for e in evals], scenario.u_lo, scenario.u_hi)
    return solve_clf_cbf_qp(problem), evals, V


def step(scenario: Scenario, x, t):
    """One zero-order-hold step; returns (next_state, log row for (x, t))."""
    model = scenario.model
    sol, evals, V = control_step(scenario, x, t)
    u = sol.u
    small = any(np.linalg.norm(e.terms.lin) < 1e-9 for e in evals)
    if small:
        log.debug("t=%.4f: barrier has a vanishing control gradient", t)
    if sol.status is not QPStatus.OPTIMAL:
        log.info("t=%.4f: QP %s", t, sol.status.value)
    x_next = model.normalize_state(rk4(model.dynamics, x, u, scenario.dt))
    intra = math.inf
    if scenario.intra_checks > 0 and evals:
        n = scenario.intra_checks
        for i in range(1, n + 1):
            # sub-step midpoints of the held-control flow
            s = (i - 0.5) / n * scenario.dt
            xs = rk4(model.dynamics, x, u, s)
            intra = min(intra, min(b.evaluate(xs, t + s).h for b in scenario.barriers))
    row = LogRow(
        t=t,
        state=np.array(x, dtype=float),
        u=np.array(u, dtype=float),
        delta=sol.delta,
        V=math.nan if V is None else V,
        h=[e.h for e in evals],
        cbc=[e.terms(u) for e in evals],
        status=sol.status,
        active_set=sol.active_labels,
        min_margin=min((e.result.margin for e in evals), default=math.inf),
        penetrating=any(e.penetrating for e in evals),
        small_lgh=small,
        intra_min_h=intra,
    )
    return x_next, row


def run(scenario: Scenario, sink: Callable[[LogRow], None] | None = None) -> TrajectoryLog:
    """Simulate until the goal disk is entered or t_max passes.

    Rows are also pushed to ``sink`` as they are produced.
    """
    out = TrajectoryLog()
    model = scenario.model
    x = model.normalize_state(scenario.x0)
    n_steps = int(math.floor(scenario.t_max / scenario.dt + 1e-9))
    for k in range(n_steps + 1):
        t = k * scenario.dt
        x_next, row = step(scenario, x, t)
        out.append(row)
        if sink is not None:
            sink(row)
        if scenario.goal.contains(model.position(x)):
            out.goal_reached = True
            out.t_goal = t
            break
        x = x_next
    return out


def grid_evaluate(
    polygon: ConvexPolygon,
    ellipse: Ellipse,
    xs,
    ys,
    theta: float,
    mode: str = "se2",
    radius: float = 1.0,
) -> np.ndarray:
    """Robot-to-obstacle distance over a grid of positions at fixed heading.

    ``mode="se2"`` uses the polygon itself; ``mode="circle"`` replaces it by a
    disc of ``radius`` about the body origin.  Returns values indexed ``[iy, ix]``.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    out = np.empty((len(ys), len(xs)))
    a, b = ellipse.shape.a, ellipse.shape.b
    for iy, y in enumerate(ys):
        for ix, x in enumerate(xs):
            if mode == "se2":
                out[iy, ix] = polygon_ellipse_distance(ellipse, polygon, SE2Pose(np.array([x, y]), theta)).value
            elif mode == "circle":
                p = to_frame(ellipse.pose, (x, y))
                try:
                    psi = closest_point_xy(a, b, p[0], p[1])[2]
                except AtCenter:
                    psi = -min(a, b)
                out[iy, ix] = psi - radius
            else:
                raise ValueError(f"unknown grid mode {mode!r}")
    return out
