import math

import numpy as np
import pytest

from oracles import brute_force_distance, polygon_overlaps
from safeguard import config
from safeguard.control import QuadraticCLF
from safeguard.distance import ConvexPolygon, Ellipse
from safeguard.ellipse import EllipseShape, sdf
from safeguard.qp import QPStatus
from safeguard.robots import ArmModel, Disc, GoalRegion, MovingObstacle, ObstacleMotion, UnicycleModel
from safeguard.se2 import SE2Pose
from safeguard.sim import Scenario, grid_evaluate, rk4, run, step

TRIANGLE = ConvexPolygon([[1.0, 0.0], [-0.6, 0.35], [-0.6, -0.35]])
FAR_GOAL = GoalRegion((1e6, 1e6), 1.0)


def free_scenario(nominal=(1.0, 0.5), dt=0.01, t_max=1.0, obstacles=(), **kw):
    return Scenario(UnicycleModel(TRIANGLE), np.zeros(3), list(obstacles), FAR_GOAL, np.array(nominal), dt=dt, t_max=t_max, **kw)


def test_scenario_validation():
    with pytest.raises(ValueError):
        free_scenario(dt=0.0)
    with pytest.raises(ValueError):
        free_scenario(dt=0.2)
    with pytest.raises(ValueError):
        free_scenario(t_max=0.0)


def test_nominal_applied_without_constraints():
    lg = run(free_scenario())
    for r in lg.rows:
        np.testing.assert_allclose(r.u, (1.0, 0.5), rtol=0, atol=1e-14)
        assert r.status is QPStatus.OPTIMAL
        assert r.delta == 0.0


def test_straight_line_step_is_exact():
    s = free_scenario(nominal=(2.0, 0.0), dt=0.05)
    x1, row = step(s, np.array([1.0, -1.0, 0.0]), 0.0)
    np.testing.assert_allclose(x1, [1.0 + 2.0 * 0.05, -1.0, 0.0], rtol=0, atol=1e-15)
    assert row.t == 0.0


def test_rows_are_evenly_spaced_and_terminate_at_t_max():
    lg = run(free_scenario(dt=0.01, t_max=0.5))
    t = np.array([r.t for r in lg.rows])
    assert len(t) == 51
    np.testing.assert_allclose(np.diff(t), 0.01, atol=1e-15)
    assert t[-1] == pytest.approx(0.5)
    assert not lg.goal_reached


def test_start_in_goal_stops_at_zero():
    s = Scenario(UnicycleModel(TRIANGLE), np.zeros(3), [], GoalRegion((0.2, 0.0), 0.5), np.array([3.0, 0.0]))
    lg = run(s)
    assert lg.goal_reached and lg.t_goal == 0.0
    assert len(lg.rows) == 1


def test_rk4_convergence_order():
    finals = []
    for dt in (0.1, 0.05, 0.025):
        lg = run(free_scenario(nominal=(1.0, 1.3), dt=dt, t_max=2.0))
        finals.append(lg.rows[-1].state)
    e1 = np.linalg.norm(finals[0] - finals[1])
    e2 = np.linalg.norm(finals[1] - finals[2])
    assert math.log2(e1 / e2) >= 3.5


def test_rk4_constant_input():
    x = rk4(lambda x, u: u, np.zeros(2), np.array([1.0, 2.0]), 0.5)
    np.testing.assert_allclose(x, (0.5, 1.0))


def test_barriers_constant_without_motion():
    ob = MovingObstacle(EllipseShape(2, 1), ObstacleMotion(SE2Pose((4, 4), 0.3)))
    lg = run(free_scenario(nominal=(0.0, 0.0), obstacles=[ob]))
    h = np.array([r.h[0] for r in lg.rows])
    assert np.max(np.abs(h - h[0])) <= 1e-12
    assert lg.min_h == min(min(r.h) for r in lg.rows)


def test_deterministic_logs():
    ob = MovingObstacle(EllipseShape(1, 0.5), ObstacleMotion(SE2Pose((3, 1), 0.3), (-0.5, 0.0), 0.2))
    s = lambda: free_scenario(nominal=(1.5, 0.0), obstacles=[ob], t_max=2.0)
    a, b = run(s()), run(s())
    assert len(a.rows) == len(b.rows)
    for ra, rb in zip(a.rows, b.rows):
        np.testing.assert_array_equal(ra.state, rb.state)
        np.testing.assert_array_equal(ra.u, rb.u)
        assert ra.h == rb.h and ra.active_set == rb.active_set


def test_sink_receives_every_row():
    seen = []
    lg = run(free_scenario(t_max=0.1), sink=seen.append)
    assert seen == lg.rows


def test_vanishing_control_gradient_is_flagged():
    ob = MovingObstacle(EllipseShape(1, 1), ObstacleMotion(SE2Pose((0, 5), 0.0)))
    s = Scenario(UnicycleModel(Disc(0.5)), np.zeros(3), [ob], FAR_GOAL, np.zeros(2), dt=0.01, t_max=0.01)
    _, row = step(s, np.zeros(3), 0.0)
    assert row.small_lgh


def test_intra_step_monitor():
    ob = MovingObstacle(EllipseShape(1, 0.5), ObstacleMotion(SE2Pose((3, 0.5), 0.0)))
    s = free_scenario(nominal=(1.0, 0.0), obstacles=[ob], t_max=0.5, intra_checks=10)
    lg = run(s)
    assert all(math.isfinite(r.intra_min_h) for r in lg.rows)
    assert all(abs(r.intra_min_h - r.h[0]) < 0.05 for r in lg.rows)


def test_clf_drives_unicycle_to_goal_without_obstacles():
    clf = QuadraticCLF(np.diag([1.0, 1.0, 0.5]), (5.0, 5.0, math.pi / 4), 2.0, [False, False, True])
    s = Scenario(
        UnicycleModel(TRIANGLE), np.array([0, 0, math.pi / 4]), [], GoalRegion((5, 5), 0.5), np.array([3.0, 0.0]),
        clf=clf, u_lo=np.array([-3.0, -4.0]), u_hi=np.array([3.0, 4.0]), t_max=10.0,
    )
    lg = run(s)
    assert lg.goal_reached
    assert lg.violations == 0


@pytest.mark.parametrize("name", ["unicycle_fig2.json", "arm_fig3.json", "narrow_passage.json"])
def test_bundled_scenarios_safe_and_reach_goal(name):
    doc = config.load(config.bundled_scenarios()[name])
    lg = run(config.build(doc))
    assert lg.goal_reached
    assert lg.min_h > 0.0
    assert lg.violations == 0
    assert lg.summary()["min_h"] == lg.min_h


def test_arm_lyapunov_decreases_overall():
    lg = run(config.build(config.load(config.bundled_scenarios()["arm_fig3.json"])))
    assert lg.rows[-1].V < lg.rows[0].V


# -- grid ---------------------------------------------------------------------


def test_grid_circle_mode_zero_radius_is_sdf():
    e = Ellipse.make(2, 1, 0.5, -0.5, 0.3)
    xs = np.linspace(-4, 4, 9)
    ys = np.linspace(-3, 3, 7)
    Z = grid_evaluate(TRIANGLE, e, xs, ys, 0.0, mode="circle", radius=0.0)
    assert Z.shape == (7, 9)
    for iy, y in enumerate(ys):
        for ix, x in enumerate(xs):
            p = e.pose.R.T @ (np.array([x, y]) - e.pose.q)
            assert Z[iy, ix] == pytest.approx(sdf(e.shape, p), abs=1e-12)


def test_grid_se2_dominates_circle():
    e = Ellipse.make(2.5, 1.0, 0, 0, math.pi / 4)
    xs = ys = np.linspace(-5, 5, 25)
    for theta in (0.0, 1.0, 2.5):
        se2 = grid_evaluate(TRIANGLE, e, xs, ys, theta)
        circ = grid_evaluate(TRIANGLE, e, xs, ys, theta, mode="circle", radius=1.0)
        assert np.all(se2 >= circ - 1e-12)


def test_grid_matches_oracle_at_random_cells():
    rng = np.random.default_rng(60)
    e = Ellipse.make(2.0, 1.0, 0.0, 0.0, 0.4)
    xs = ys = np.linspace(-5, 5, 41)
    Z = grid_evaluate(TRIANGLE, e, xs, ys, 0.7)
    checked = 0
    while checked < 20:
        ix, iy = rng.integers(0, 41, 2)
        pose = SE2Pose((xs[ix], ys[iy]), 0.7)
        if polygon_overlaps(e, TRIANGLE, pose):
            assert Z[iy, ix] < 0
            continue
        assert Z[iy, ix] == pytest.approx(brute_force_distance(e, TRIANGLE, pose), abs=1e-5)
        checked += 1


def test_grid_unknown_mode():
    with pytest.raises(ValueError):
        grid_evaluate(TRIANGLE, Ellipse.make(1, 1), [0.0], [3.0], 0.0, mode="square")
