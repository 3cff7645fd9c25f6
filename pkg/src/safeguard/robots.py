"""Controlled systems (polygon unicycle, planar K-joint arm) and scripted obstacles.

Each model is control affine, ``xdot = f(x) + g(x) u``, and describes its
shape as a list of rigid :class:`Body` objects.  A body carries its world pose
and the Jacobians of that pose with respect to the state, which is all the
barrier layer needs to chain distance gradients back to the state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .distance import ConvexPolygon, DistanceResult, Ellipse, disc_ellipse_distance, polygon_ellipse_distance
from .ellipse import EllipseShape
from .se2 import SE2Pose, wrap_angle


@dataclass(frozen=True)
class Disc:
    """Round robot shape used for the encapsulating-circle baseline.

    ``center`` is the disc center in the body frame.
    """

    radius: float
    center: tuple = (0.0, 0.0)

    def __post_init__(self):
        if not self.radius >= 0.0:
            raise ValueError("disc radius must be non-negative")

    @classmethod
    def enclosing(cls, polygon: ConvexPolygon) -> "Disc":
        """Disc about the body origin that contains every vertex."""
        return cls(polygon.bounding_radius)


@dataclass(frozen=True)
class Body:
    shape: ConvexPolygon | Disc
    pose: SE2Pose
    dq_dx: np.ndarray  # 2 x n
    dtheta_dx: np.ndarray  # n


@dataclass(frozen=True)
class GoalRegion:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float).reshape(2))
        if not self.radius > 0.0:
            raise ValueError("goal radius must be positive")

    def contains(self, point) -> bool:
        return bool(np.hypot(*(np.asarray(point, dtype=float) - self.center)) <= self.radius)


def body_distance(body: Body, obstacle: Ellipse) -> DistanceResult:
    """Distance from one rigid body to a posed ellipse, gradients w.r.t. the body pose."""
    shape = body.shape
    if isinstance(shape, ConvexPolygon):
        return polygon_ellipse_distance(obstacle, shape, body.pose)
    offset = body.pose.R @ np.asarray(shape.center, dtype=float)
    res = disc_ellipse_distance(obstacle, SE2Pose(body.pose.q + offset, body.pose.theta), shape.radius)
    if offset.any():
        # the center swings with the body heading
        gth = float(res.grad_qtilde @ (body.pose.dR @ np.asarray(shape.center, dtype=float)))
        res = replace(res, grad_thetatilde=gth)
    return res


def state_gradient(body: Body, res: DistanceResult) -> np.ndarray:
    """Chain a body-pose gradient back to the state."""
    return res.grad_qtilde @ body.dq_dx + res.grad_thetatilde * body.dtheta_dx


# -- unicycle -----------------------------------------------------------------


def unicycle_dynamics(state, u) -> np.ndarray:
    x, y, theta = state
    v, w = u
    return np.array([v * math.cos(theta), v * math.sin(theta), w])


def unicycle_shape(state) -> SE2Pose:
    return SE2Pose(np.array([state[0], state[1]]), state[2])


_UNICYCLE_DQ = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
_UNICYCLE_DTH = np.array([0.0, 0.0, 1.0])


class UnicycleModel:
    """Unicycle kinematics with state (x, y, theta) and input (v, omega)."""

    n_state = 3
    n_input = 2
    angle_mask = np.array([False, False, True])

    def __init__(self, shape: ConvexPolygon | Disc):
        self.shape = shape

    def f(self, x) -> np.ndarray:
        return np.zeros(3)

    def g(self, x) -> np.ndarray:
        c, s = math.cos(x[2]), math.sin(x[2])
        return np.array([[c, 0.0], [s, 0.0], [0.0, 1.0]])

    def dynamics(self, x, u) -> np.ndarray:
        return unicycle_dynamics(x, u)

    def bodies(self, x) -> list[Body]:
        return [Body(self.shape, unicycle_shape(x), _UNICYCLE_DQ, _UNICYCLE_DTH)]

    def position(self, x) -> np.ndarray:
        return np.array([x[0], x[1]])

    def normalize_state(self, x) -> np.ndarray:
        x = np.array(x, dtype=float)
        x[2] = wrap_angle(x[2])
        return x


# -- planar arm ---------------------------------------------------------------


def arm_forward_kinematics(joint_angles, link_lengths, base=(0.0, 0.0)):
    """Joint positions (K+1 rows, last is the end effector) and cumulative link angles."""
    theta = np.asarray(joint_angles, dtype=float)
    lengths = np.asarray(link_lengths, dtype=float)
    cum = np.cumsum(theta)
    steps = lengths[:, None] * np.column_stack([np.cos(cum), np.sin(cum)])
    joints = np.vstack([np.zeros(2), np.cumsum(steps, axis=0)]) + np.asarray(base, dtype=float)
    return joints, cum


def arm_jacobian(joint_angles, link_lengths):
    """Sensitivities of joint positions and cumulative angles to each joint angle.

    Returns ``dq`` with shape (K+1, 2, K) and ``dtheta`` with shape (K, K):
    ``dq[j, :, k]`` is d(joint j position)/d(angle k) and ``dtheta[j, k]`` is 1
    when k <= j.
    """
    theta = np.asarray(joint_angles, dtype=float)
    lengths = np.asarray(link_lengths, dtype=float)
    K = len(theta)
    cum = np.cumsum(theta)
    perp = lengths[:, None] * np.column_stack([-np.sin(cum), np.cos(cum)])
    dq = np.zeros((K + 1, 2, K))
    for j in range(1, K + 1):
        for k in range(j):
            dq[j, :, k] = perp[k:j].sum(axis=0)
    dtheta = np.tril(np.ones((K, K)))
    return dq, dtheta


class ArmModel:
    """Planar serial arm driven at the velocity level: theta_dot = omega."""

    def __init__(self, link_lengths, base=(0.0, 0.0), link_shapes=None):
        self.link_lengths = np.asarray(link_lengths, dtype=float)
        if self.link_lengths.ndim != 1 or len(self.link_lengths) < 1 or np.any(self.link_lengths <= 0.0):
            raise ValueError("need at least one link and positive link lengths")
        self.base = np.asarray(base, dtype=float)
        K = len(self.link_lengths)
        self.n_state = K
        self.n_input = K
        self.angle_mask = np.ones(K, dtype=bool)
        if link_shapes is None:
            link_shapes = [ConvexPolygon.segment(L) for L in self.link_lengths]
        self.link_shapes = list(link_shapes)

    def f(self, x) -> np.ndarray:
        return np.zeros(self.n_state)

    def g(self, x) -> np.ndarray:
        return np.eye(self.n_state)

    def dynamics(self, x, u) -> np.ndarray:
        return np.asarray(u, dtype=float).copy()

    def forward_kinematics(self, x):
        return arm_forward_kinematics(x, self.link_lengths, self.base)

    def bodies(self, x) -> list[Body]:
        joints, cum = self.forward_kinematics(x)
        dq, dth = arm_jacobian(x, self.link_lengths)
        return [
            Body(shape, SE2Pose(joints[j], cum[j]), dq[j], dth[j])
            for j, shape in enumerate(self.link_shapes)
        ]

    def position(self, x) -> np.ndarray:
        return self.forward_kinematics(x)[0][-1]

    def normalize_state(self, x) -> np.ndarray:
        return np.array(x, dtype=float)


def arm_cbf(model: ArmModel, obstacle: "MovingObstacle", x, t: float = 0.0):
    """Smallest link-to-obstacle distance, its gradient w.r.t. the joint angles, and the link index.

    Ties go to the lower link index; the gradient is that link's gradient.
    """
    ellipse = obstacle.at(t)
    best = None
    for j, body in enumerate(model.bodies(x)):
        res = body_distance(body, ellipse)
        if best is None or res.value < best[0]:
            best = (res.value, state_gradient(body, res), j)
    return best


# -- obstacles ----------------------------------------------------------------


@dataclass(frozen=True)
class ObstacleMotion:
    """Rigid motion at constant linear and angular velocity.

    ``segments`` optionally switches to new velocities at given times, as
    ``(t_switch, (vx, vy), omega)`` tuples in increasing ``t_switch`` order.
    """

    initial_pose: SE2Pose
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(2))
    angular_velocity: float = 0.0
    segments: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "velocity", np.asarray(self.velocity, dtype=float).reshape(2))
        segs = tuple((float(t), np.asarray(v, dtype=float).reshape(2), float(w)) for t, v, w in self.segments)
        if any(b[0] <= a[0] for a, b in zip(segs, segs[1:])):
            raise ValueError("segment switch times must increase")
        object.__setattr__(self, "segments", segs)

    def _pieces(self):
        yield 0.0, self.velocity, self.angular_velocity
        yield from self.segments

    def velocity_at(self, t: float) -> tuple[np.ndarray, float]:
        v, w = self.velocity, self.angular_velocity
        for ts, vs, ws in self.segments:
            if t >= ts:
                v, w = vs, ws
        return v, w

    def pose_at(self, t: float) -> SE2Pose:
        q = np.array(self.initial_pose.q, dtype=float)
        theta = self.initial_pose.theta
        pieces = list(self._pieces())
        for (t0, v, w), nxt in zip(pieces, pieces[1:] + [(math.inf, None, None)]):
            if t <= t0:
                break
            span = min(t, nxt[0]) - t0
            q = q + v * span
            theta = theta + w * span
        return SE2Pose(q, theta)


def obstacle_pose_at(motion: ObstacleMotion, t: float) -> SE2Pose:
    return motion.pose_at(t)


@dataclass(frozen=True)
class MovingObstacle:
    shape: EllipseShape
    motion: ObstacleMotion

    def at(self, t: float) -> Ellipse:
        return Ellipse(self.shape, self.motion.pose_at(t))
