"""Distance between a world-frame ellipse and a convex polygon, with gradients.

The polygon is moved into the ellipse body frame, its edges are checked one
by one (tangent point for edge interiors, closest point for vertices), and the
best witness pair gives the value.  The four partial derivatives follow from
the SDF gradient at the polygon witness:

    dd/dq       = -R grad
    dd/dqtilde  =  R grad
    dd/dtheta   =  grad . (dR^T (Rtilde ptilde + qtilde - q))
    dd/dthetatilde = grad . (R^T dRtilde ptilde)

where ``ptilde`` is the witness in the robot body frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .ellipse import (
    AtCenter,
    EllipseShape,
    LineIntersectsEllipse,
    closest_point_xy,
    line_tangent_xy,
)
from .se2 import SE2Pose

MIN_EDGE_LENGTH = 1e-9
TIE_TOL = 1e-12


class Penetration(ValueError):
    """The shapes overlap, so the separation distance is undefined."""


@dataclass(frozen=True)
class Ellipse:
    """An elliptical obstacle placed in the world."""

    shape: EllipseShape
    pose: SE2Pose

    @classmethod
    def make(cls, a: float, b: float, x: float = 0.0, y: float = 0.0, theta: float = 0.0) -> "Ellipse":
        return cls(EllipseShape(a, b), SE2Pose(np.array([x, y]), theta))

    def at(self, pose: SE2Pose) -> "Ellipse":
        return Ellipse(self.shape, pose)

    def outline(self, n: int = 128) -> np.ndarray:
        return self.shape.boundary(n) @ self.pose.R.T + self.pose.q


class ConvexPolygon:
    """Robot shape: body-frame vertices in counter-clockwise order.

    Two vertices describe a line segment (one edge); three or more a closed
    convex polygon.
    """

    def __init__(self, body_vertices):
        v = np.array(body_vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 2:
            raise ValueError("need at least two 2-D vertices")
        if not np.all(np.isfinite(v)):
            raise ValueError("vertices must be finite")
        m = len(v)
        nxt = np.roll(v, -1, axis=0)
        if np.any(np.hypot(*(nxt - v).T) <= MIN_EDGE_LENGTH):
            raise ValueError("consecutive vertices coincide")
        if m >= 3:
            d = nxt - v
            cross = d[:, 0] * np.roll(d, -1, axis=0)[:, 1] - d[:, 1] * np.roll(d, -1, axis=0)[:, 0]
            if np.any(cross < 0.0) or cross.sum() <= 0.0:
                raise ValueError("vertices must form a convex polygon in counter-clockwise order")
        v.setflags(write=False)
        self.body_vertices = v

    def __len__(self):
        return len(self.body_vertices)

    def __repr__(self):
        return f"ConvexPolygon({self.body_vertices.tolist()})"

    @property
    def edges(self) -> list[tuple[int, int]]:
        m = len(self.body_vertices)
        if m == 2:
            return [(0, 1)]
        return [(i, (i + 1) % m) for i in range(m)]

    @property
    def bounding_radius(self) -> float:
        """Radius of the smallest origin-centered disc containing the polygon."""
        return float(np.max(np.hypot(*self.body_vertices.T)))

    def world_vertices(self, pose: SE2Pose) -> np.ndarray:
        return self.body_vertices @ pose.R.T + pose.q

    @classmethod
    def segment(cls, length: float) -> "ConvexPolygon":
        return cls([[0.0, 0.0], [length, 0.0]])


@dataclass(frozen=True)
class DistanceResult:
    value: float
    robot_witness: np.ndarray
    ellipse_witness: np.ndarray
    grad_q: np.ndarray
    grad_theta_obs: float
    grad_qtilde: np.ndarray
    grad_thetatilde: float
    argmin_edge: int
    argmin_tau: float
    margin: float
    penetrating: bool = False
    normal: np.ndarray | None = None
    witness_body: np.ndarray | None = None


class SegmentDistance(NamedTuple):
    distance: float
    tau_star: float
    seg_point: np.ndarray
    ellipse_point: np.ndarray


def _center_cp(a, b):
    """Closest-point tuple for a query exactly at the ellipse center."""
    if b <= a:
        return 0.0, b, -b, 0.0, 1.0
    return a, 0.0, -a, 1.0, 0.0


def _algebraic_min(a, b, x0, y0, x1, y1):
    """Minimum of (x/a)^2 + (y/b)^2 over the segment, and where it occurs."""
    dx, dy = x1 - x0, y1 - y0
    A = (dx / a) ** 2 + (dy / b) ** 2
    B = x0 * dx / (a * a) + y0 * dy / (b * b)
    tau = min(max(-B / A, 0.0), 1.0) if A > 0.0 else 0.0
    x, y = x0 + tau * dx, y0 + tau * dy
    return (x / a) ** 2 + (y / b) ** 2, tau


def _edge(a, b, p0, p1, c0, c1):
    """Best witness on one edge given the endpoint closest-point results.

    Returns (distance, tau, seg_point, ellipse_point, feature) where feature is
    0 / 1 for an endpoint and -1 for the edge interior.
    """
    try:
        ex, ey, lx, ly, tau = line_tangent_xy(a, b, p0[0], p0[1], p1[0], p1[1])
        if 0.0 < tau < 1.0:
            return math.hypot(lx - ex, ly - ey), tau, (lx, ly), (ex, ey), -1
    except LineIntersectsEllipse:
        pass
    # distance to a convex set is convex along the segment, so an endpoint wins
    if c1[2] < c0[2]:
        return c1[2], 1.0, p1, (c1[0], c1[1]), 1
    return c0[2], 0.0, p0, (c0[0], c0[1]), 0


def segment_distance(e: EllipseShape, p0, p1) -> SegmentDistance:
    """Distance from the ellipse (body frame) to the segment p0 -> p1.

    Raises :class:`Penetration` if the segment touches the ellipse interior.
    """
    a, b = e.a, e.b
    p0 = (float(p0[0]), float(p0[1]))
    p1 = (float(p1[0]), float(p1[1]))
    if math.hypot(p1[0] - p0[0], p1[1] - p0[1]) <= MIN_EDGE_LENGTH:
        raise ValueError("degenerate segment")
    if _algebraic_min(a, b, *p0, *p1)[0] < 1.0:
        raise Penetration("segment enters the ellipse")
    c0 = closest_point_xy(a, b, *p0)
    c1 = closest_point_xy(a, b, *p1)
    d, tau, sp, ep, _ = _edge(a, b, p0, p1, c0, c1)
    return SegmentDistance(d, tau, np.array(sp), np.array(ep))


def _gradients(obstacle: SE2Pose, robot: SE2Pose, witness, normal):
    """Partials of the distance given the witness p' and unit SDF gradient (obstacle frame)."""
    c, s = obstacle._c, obstacle._s
    ct, st = robot._c, robot._s
    gx, gy = normal
    px, py = witness
    # world-frame normal R grad, and R p' = Rtilde ptilde + qtilde - q
    wnx, wny = c * gx - s * gy, s * gx + c * gy
    wx, wy = c * px - s * py, s * px + c * py
    # ptilde = Rtilde^T (R p' + q - qtilde)
    rx = wx + obstacle.q[0] - robot.q[0]
    ry = wy + obstacle.q[1] - robot.q[1]
    ptx, pty = ct * rx + st * ry, -st * rx + ct * ry
    # dR^T w with dR = [[-s, -c], [c, -s]]
    dtheta = gx * (-s * wx + c * wy) + gy * (-c * wx - s * wy)
    # R^T dRtilde ptilde
    ux, uy = -st * ptx - ct * pty, ct * ptx - st * pty
    dthetatilde = gx * (c * ux + s * uy) + gy * (-s * ux + c * uy)
    grad_qtilde = np.array([wnx, wny])
    return -grad_qtilde, dtheta, grad_qtilde, dthetatilde, np.array([ptx, pty])


def _penetration_result(a, b, pts, vertex_cp, edges, obstacle, robot):
    m = len(pts)
    center_inside = m >= 3 and all(
        (pts[j][0] - pts[i][0]) * (-pts[i][1]) - (pts[j][1] - pts[i][1]) * (-pts[i][0]) > 0.0 for i, j in edges
    )
    if center_inside:
        best = None
        for k, (i, j) in enumerate(edges):
            x0, y0 = pts[i]
            dx, dy = pts[j][0] - x0, pts[j][1] - y0
            tau = min(max(-(x0 * dx + y0 * dy) / (dx * dx + dy * dy), 0.0), 1.0)
            bx, by = x0 + tau * dx, y0 + tau * dy
            r = math.hypot(bx, by)
            if best is None or r < best[0] - TIE_TOL:
                best = (r, k, tau, bx, by)
        r, k, tau, bx, by = best
        witness, ellipse_pt = (bx, by), (0.0, 0.0)
        normal = (-bx / r, -by / r)
        value = -r
    else:
        best = None
        for k, (i, j) in enumerate(edges):
            cands = [(vertex_cp[i], 0.0), (vertex_cp[j], 1.0)]
            alg, tau = _algebraic_min(a, b, *pts[i], *pts[j])
            x = pts[i][0] + tau * (pts[j][0] - pts[i][0])
            y = pts[i][1] + tau * (pts[j][1] - pts[i][1])
            if alg < 1.0 and 0.0 < tau < 1.0:
                try:
                    cands.append((closest_point_xy(a, b, x, y) + (x, y), tau))
                except AtCenter:
                    cands.append((_center_cp(a, b) + (x, y), tau))
            for cp, t in cands:
                if best is None or cp[2] < best[0][2] - TIE_TOL:
                    best = (cp, k, t)
        cp, k, tau = best
        i, j = edges[k]
        witness = (cp[5], cp[6]) if len(cp) > 5 else (pts[i] if tau == 0.0 else pts[j])
        ellipse_pt = (cp[0], cp[1])
        normal = (cp[3], cp[4])
        value = cp[2]
    gq, gth, gqt, gtht, pt = _gradients(obstacle, robot, witness, normal)
    return DistanceResult(
        value=value,
        robot_witness=np.array(witness),
        ellipse_witness=np.array(ellipse_pt),
        grad_q=gq,
        grad_theta_obs=gth,
        grad_qtilde=gqt,
        grad_thetatilde=gtht,
        argmin_edge=k,
        argmin_tau=tau,
        margin=0.0,
        penetrating=True,
        normal=np.array(normal),
        witness_body=pt,
    )


def polygon_ellipse_distance(obstacle: Ellipse, polygon: ConvexPolygon, robot_pose: SE2Pose) -> DistanceResult:
    """Separation distance between an ellipse and a convex polygon, both placed in the world.

    When the shapes overlap the result is flagged ``penetrating`` and carries a
    negative stand-in value (the deepest sampled SDF value, or minus the
    distance from the ellipse center to the polygon boundary when the center is
    enclosed) together with the gradients of that stand-in.
    """
    a, b = obstacle.shape.a, obstacle.shape.b
    opose = obstacle.pose
    c, s = opose._c, opose._s
    ct, st = robot_pose._c, robot_pose._s
    # vertices in the obstacle frame: R^T (qtilde + Rtilde ptilde - q)
    ox = robot_pose.q[0] - opose.q[0]
    oy = robot_pose.q[1] - opose.q[1]
    pts = []
    for vx, vy in polygon.body_vertices.tolist():
        wx, wy = ox + ct * vx - st * vy, oy + st * vx + ct * vy
        pts.append((c * wx + s * wy, -s * wx + c * wy))
    edges = polygon.edges

    vertex_cp = []
    for x, y in pts:
        try:
            vertex_cp.append(closest_point_xy(a, b, x, y))
        except AtCenter:
            vertex_cp.append(_center_cp(a, b))

    if any(_algebraic_min(a, b, *pts[i], *pts[j])[0] < 1.0 for i, j in edges) or (
        len(pts) >= 3 and all(
            (pts[j][0] - pts[i][0]) * (-pts[i][1]) - (pts[j][1] - pts[i][1]) * (-pts[i][0]) > 0.0 for i, j in edges
        )
    ):
        return _penetration_result(a, b, pts, vertex_cp, edges, opose, robot_pose)

    best = None
    features: dict[tuple[str, int], float] = {}
    for k, (i, j) in enumerate(edges):
        d, tau, sp, ep, feat = _edge(a, b, pts[i], pts[j], vertex_cp[i], vertex_cp[j])
        key = ("e", k) if feat < 0 else ("v", (i, j)[feat])
        features[key] = d
        if best is None or d < best[0] - TIE_TOL:
            best = (d, tau, sp, ep, k)
    d, tau, sp, ep, k = best
    ordered = sorted(features.values())
    margin = ordered[1] - ordered[0] if len(ordered) > 1 else math.inf

    if d > 0.0:
        normal = ((sp[0] - ep[0]) / d, (sp[1] - ep[1]) / d)
    else:
        nx, ny = ep[0] / (a * a), ep[1] / (b * b)
        nn = math.hypot(nx, ny)
        normal = (nx / nn, ny / nn)
    gq, gth, gqt, gtht, pt = _gradients(opose, robot_pose, sp, normal)
    return DistanceResult(
        value=d,
        robot_witness=np.array(sp, dtype=float),
        ellipse_witness=np.array(ep, dtype=float),
        grad_q=gq,
        grad_theta_obs=gth,
        grad_qtilde=gqt,
        grad_thetatilde=gtht,
        argmin_edge=k,
        argmin_tau=tau,
        margin=margin,
        normal=np.array(normal),
        witness_body=pt,
    )


def disc_ellipse_distance(obstacle: Ellipse, center_pose: SE2Pose, radius: float) -> DistanceResult:
    """Distance from the ellipse to a disc of ``radius`` centered at ``center_pose.q``.

    This is the encapsulating-circle approximation used as a baseline; it is
    blind to the robot heading, so ``grad_thetatilde`` is always zero.
    """
    a, b = obstacle.shape.a, obstacle.shape.b
    opose = obstacle.pose
    p = (
        opose._c * (center_pose.q[0] - opose.q[0]) + opose._s * (center_pose.q[1] - opose.q[1]),
        -opose._s * (center_pose.q[0] - opose.q[0]) + opose._c * (center_pose.q[1] - opose.q[1]),
    )
    try:
        ex, ey, psi, gx, gy = closest_point_xy(a, b, *p)
    except AtCenter:
        ex, ey, psi, gx, gy = _center_cp(a, b)
    value = psi - radius
    gq, gth, gqt, _, pt = _gradients(opose, center_pose, p, (gx, gy))
    return DistanceResult(
        value=value,
        robot_witness=np.array([p[0] - radius * gx, p[1] - radius * gy]),
        ellipse_witness=np.array([ex, ey]),
        grad_q=gq,
        grad_theta_obs=gth,
        grad_qtilde=gqt,
        grad_thetatilde=0.0,
        argmin_edge=0,
        argmin_tau=0.0,
        margin=math.inf,
        penetrating=value < 0.0,
        normal=np.array([gx, gy]),
        witness_body=pt,
    )


def matrix_partials(result: DistanceResult, obstacle_pose: SE2Pose, robot_pose: SE2Pose):
    """Partials with respect to the two rotation matrices.

    Returns ``(dd_dR, dd_dRtilde)`` with ``dd_dR = outer(grad, Rtilde ptilde + qtilde - q)``
    and ``dd_dRtilde = R outer(grad, ptilde)``.  They satisfy
    ``trace(dd_dR @ dR) == dd/dtheta`` and ``trace(dd_dRtilde @ dRtilde.T) == dd/dthetatilde``.
    """
    grad = result.normal
    pt = result.witness_body
    w = robot_pose.R @ pt + robot_pose.q - obstacle_pose.q
    return np.outer(grad, w), obstacle_pose.R @ np.outer(grad, pt)
