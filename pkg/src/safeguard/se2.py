"""Planar rigid-body poses, rotations and frame changes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi


def normalize_angle(theta: float) -> float:
    """Map an angle to [0, 2*pi)."""
    out = math.fmod(theta, TWO_PI)
    if out < 0.0:
        out += TWO_PI
    # fmod can return exactly 2*pi after the shift for tiny negative inputs
    if out >= TWO_PI:
        out = 0.0
    return out


def wrap_angle(theta):
    """Wrap an angle (or array of angles) to (-pi, pi]."""
    wrapped = np.pi - np.mod(np.pi - np.asarray(theta, dtype=float), TWO_PI)
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


def rotation_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def rotation_derivative(theta: float) -> np.ndarray:
    """d/dtheta of :func:`rotation_matrix`."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[-s, -c], [c, -s]])


@dataclass(frozen=True)
class SE2Pose:
    """Position ``q`` (meters) and heading ``theta`` (radians, stored in [0, 2*pi))."""

    q: np.ndarray
    theta: float = 0.0
    _c: float = field(init=False, repr=False, compare=False)
    _s: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        q = np.array(self.q, dtype=float).reshape(2)
        q.setflags(write=False)
        theta = normalize_angle(float(self.theta))
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "_c", math.cos(theta))
        object.__setattr__(self, "_s", math.sin(theta))

    @classmethod
    def from_xytheta(cls, x: float, y: float, theta: float) -> "SE2Pose":
        return cls(np.array([x, y]), theta)

    @property
    def R(self) -> np.ndarray:
        return np.array([[self._c, -self._s], [self._s, self._c]])

    @property
    def dR(self) -> np.ndarray:
        return np.array([[-self._s, -self._c], [self._c, -self._s]])

    def compose(self, other: "SE2Pose") -> "SE2Pose":
        """Pose of ``other`` (expressed in this frame) in the parent frame."""
        return SE2Pose(from_frame(self, other.q), self.theta + other.theta)

    def inverse(self) -> "SE2Pose":
        return SE2Pose(-(self.R.T @ self.q), -self.theta)

    def __eq__(self, other):
        if not isinstance(other, SE2Pose):
            return NotImplemented
        return bool(np.array_equal(self.q, other.q)) and self.theta == other.theta

    def __hash__(self):
        return hash((float(self.q[0]), float(self.q[1]), self.theta))


def to_frame(pose: SE2Pose, world_point) -> np.ndarray:
    """Express a world point in the body frame of ``pose``: R^T (p - q)."""
    dx = float(world_point[0]) - pose.q[0]
    dy = float(world_point[1]) - pose.q[1]
    c, s = pose._c, pose._s
    return np.array([c * dx + s * dy, -s * dx + c * dy])


def from_frame(pose: SE2Pose, body_point) -> np.ndarray:
    """Express a body-frame point of ``pose`` in the world frame: q + R p."""
    px, py = float(body_point[0]), float(body_point[1])
    c, s = pose._c, pose._s
    return np.array([pose.q[0] + c * px - s * py, pose.q[1] + s * px + c * py])
