"""Ellipse signed distance, closest point to a point, and tangency with a line.

Everything here works in the ellipse body frame: centered at the origin with
semi-axes ``a`` along x and ``b`` along y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .quartic import solve_monic_quartic

CENTER_TOL = 1e-12
CIRCLE_RTOL = 1e-9
SEGMENT_MIN_LENGTH = 1e-12
T_POLISH_STEPS = 4


class AtCenter(ValueError):
    """The query point is the ellipse center, where the SDF gradient is undefined."""


class LineIntersectsEllipse(ValueError):
    """The infinite line meets the ellipse, so no tangent closest point exists."""


@dataclass(frozen=True)
class EllipseShape:
    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0.0 and self.b > 0.0) or not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError(f"semi-axes must be positive and finite, got a={self.a}, b={self.b}")
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))

    def contains(self, p) -> bool:
        return (p[0] / self.a) ** 2 + (p[1] / self.b) ** 2 < 1.0

    def boundary(self, n: int = 128) -> np.ndarray:
        t = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
        return np.column_stack([self.a * np.cos(t), self.b * np.sin(t)])


@dataclass(frozen=True)
class ClosestPointResult:
    point_on_ellipse: np.ndarray
    distance: float
    gradient: np.ndarray


class LineClosestPoint(NamedTuple):
    ellipse_point: np.ndarray
    line_point: np.ndarray
    tau: float


def _sqdist(x, y, ex, ey):
    return (x - ex) ** 2 + (y - ey) ** 2


def _polish_t(a, b, x, y, t):
    """Newton on the stationarity condition in the angle parameter, kept in [0, pi/2]."""
    k = b * b - a * a
    best = _sqdist(x, y, a * math.cos(t), b * math.sin(t))
    for _ in range(T_POLISH_STEPS):
        c, s = math.cos(t), math.sin(t)
        g = k * c * s + a * x * s - b * y * c
        dg = k * (c * c - s * s) + a * x * c + b * y * s
        if g == 0.0 or dg <= 0.0:
            break
        tn = min(max(t - g / dg, 0.0), 0.5 * math.pi)
        dn = _sqdist(x, y, a * math.cos(tn), b * math.sin(tn))
        if not dn < best:
            break
        t, best = tn, dn
    return t


def closest_point_first_quadrant(a: float, b: float, x: float, y: float) -> tuple[float, float]:
    """Closest boundary point to (x, y) with x, y >= 0; the answer is in the same quadrant."""
    k = b * b - a * a
    if abs(k) < CIRCLE_RTOL * max(a * a, b * b):
        r = math.hypot(x, y)
        return a * x / r, b * y / r

    candidates = [(a, 0.0), (0.0, b)]
    if y == 0.0:
        lam = -a * x / k
        if abs(lam) <= 1.0:
            candidates.append((a * lam, b * math.sqrt(1.0 - lam * lam)))
    elif x == 0.0:
        n = y * b / k
        if n * n <= 1.0:
            lam = math.sqrt(1.0 - n * n)
            candidates.append((a * lam, b * abs(n)))
    else:
        m = x * a / k
        n = y * b / k
        for lam in solve_monic_quartic((2.0 * m, m * m + n * n - 1.0, -2.0 * m, -m * m)):
            if -1.0 - 1e-9 <= lam <= 1.0 + 1e-9:
                lam = min(max(lam, -1.0), 1.0)
                candidates.append((a * lam, b * math.sqrt(1.0 - lam * lam)))

    ex, ey = min(candidates, key=lambda c: _sqdist(x, y, c[0], c[1]))
    if ex >= 0.0 and ey >= 0.0 and x > 0.0 and y > 0.0:
        t = _polish_t(a, b, x, y, math.atan2(ey / b, ex / a))
        ex, ey = a * math.cos(t), b * math.sin(t)
    return ex, ey


def closest_point_xy(a: float, b: float, px: float, py: float) -> tuple[float, float, float, float, float]:
    """Scalar kernel: (ex, ey, signed_distance, gx, gy) for a body-frame point."""
    if math.hypot(px, py) < CENTER_TOL:
        raise AtCenter("query point coincides with the ellipse center")
    sx = -1.0 if px < 0.0 else 1.0
    sy = -1.0 if py < 0.0 else 1.0
    x, y = abs(px), abs(py)
    ex, ey = closest_point_first_quadrant(a, b, x, y)
    dx, dy = x - ex, y - ey
    dist = math.hypot(dx, dy)
    inside = (x / a) ** 2 + (y / b) ** 2 < 1.0
    if dist == 0.0:
        nx, ny = ex / (a * a), ey / (b * b)
        nn = math.hypot(nx, ny)
        gx, gy = nx / nn, ny / nn
        signed = 0.0
    elif inside:
        gx, gy = -dx / dist, -dy / dist
        signed = -dist
    else:
        gx, gy = dx / dist, dy / dist
        signed = dist
    return sx * ex, sy * ey, signed, sx * gx, sy * gy


def closest_point_to_point(e: EllipseShape, p) -> ClosestPointResult:
    """Closest point on the ellipse boundary to ``p`` and the signed distance.

    The distance is negative inside the ellipse.  The gradient is the unit
    SDF gradient, i.e. it always points away from the ellipse interior.
    """
    ex, ey, d, gx, gy = closest_point_xy(e.a, e.b, float(p[0]), float(p[1]))
    return ClosestPointResult(np.array([ex, ey]), d, np.array([gx, gy]))


def sdf(e: EllipseShape, p) -> float:
    return closest_point_xy(e.a, e.b, float(p[0]), float(p[1]))[2]


def line_tangent_xy(a, b, x0, y0, x1, y1):
    """Scalar kernel of :func:`closest_point_to_line`: (ex, ey, lx, ly, tau)."""
    dx, dy = x1 - x0, y1 - y0
    length = math.hypot(dx, dy)
    if length <= SEGMENT_MIN_LENGTH:
        raise ValueError("degenerate line: the two points coincide")
    nx, ny = -dy / length, dx / length
    C = -(nx * x0 + ny * y0)
    if C == 0.0:
        raise LineIntersectsEllipse("line passes through the ellipse center")
    sign = -1.0 if C > 0.0 else 1.0
    en = math.hypot(a * nx, b * ny)
    ex, ey = sign * a * a * nx / en, sign * b * b * ny / en
    tau = (dx * (ex - x0) + dy * (ey - y0)) / (length * length)
    lx, ly = x0 + tau * dx, y0 + tau * dy
    if ((lx - ex) * nx + (ly - ey) * ny) * sign <= 0.0:
        raise LineIntersectsEllipse("line meets the ellipse")
    return ex, ey, lx, ly, tau


def closest_point_to_line(e: EllipseShape, p0, p1) -> LineClosestPoint:
    """Tangency point of the ellipse with the direction of the line through p0, p1.

    ``tau`` parametrizes the closest point on the line as p0 + tau (p1 - p0)
    and is not clamped to [0, 1].
    """
    ex, ey, lx, ly, tau = line_tangent_xy(e.a, e.b, float(p0[0]), float(p0[1]), float(p1[0]), float(p1[1]))
    return LineClosestPoint(np.array([ex, ey]), np.array([lx, ly]), tau)
