"""Independent reference computations used by the tests.

Nothing here calls the closed-form geometry under test: distances come from
dense sampling with grid refinement, derivatives from central differences,
QP optima from enumerating active sets.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.spatial import ConvexHull

from safeguard.distance import ConvexPolygon, Ellipse, polygon_ellipse_distance
from safeguard.se2 import SE2Pose


# -- ellipse / point ----------------------------------------------------------


def _refine_1d(f, n0=4096, zoom=64, rounds=5, keep=3, lo=0.0, hi=2 * math.pi, periodic=True):
    """Global minimum of a scalar function by a coarse grid plus repeated local zooming."""
    t = np.linspace(lo, hi, n0, endpoint=not periodic)
    v = f(t)
    step = (hi - lo) / n0
    order = np.argsort(v)
    seeds = []
    for i in order:
        if all(abs(t[i] - s) > 3 * step for s in seeds):
            seeds.append(t[i])
        if len(seeds) == keep:
            break
    best = float(v.min())
    for s in seeds:
        center, width = s, 2 * step
        for _ in range(rounds):
            tt = np.linspace(center - width, center + width, zoom + 1)
            if not periodic:
                tt = np.clip(tt, lo, hi)
            vv = f(tt)
            k = int(np.argmin(vv))
            center = tt[k]
            best = min(best, float(vv[k]))
            width *= 4.0 / zoom
    return best


def sampled_point_distance(a, b, p) -> float:
    """Unsigned distance from p to the ellipse boundary by sampling the angle parameter."""
    px, py = float(p[0]), float(p[1])
    return math.sqrt(_refine_1d(lambda t: (a * np.cos(t) - px) ** 2 + (b * np.sin(t) - py) ** 2))


def sampled_sdf(a, b, p) -> float:
    d = sampled_point_distance(a, b, p)
    return -d if (p[0] / a) ** 2 + (p[1] / b) ** 2 < 1.0 else d


def _point_segment_sq(px, py, x0, y0, x1, y1):
    dx, dy = x1 - x0, y1 - y0
    tau = np.clip(((px - x0) * dx + (py - y0) * dy) / (dx * dx + dy * dy), 0.0, 1.0)
    return (px - x0 - tau * dx) ** 2 + (py - y0 - tau * dy) ** 2


def sampled_segment_distance(a, b, p0, p1) -> float:
    """Distance between the ellipse boundary and a segment (both in the ellipse frame)."""
    return math.sqrt(_refine_1d(lambda t: _point_segment_sq(a * np.cos(t), b * np.sin(t), *p0, *p1)))


def sampled_line_distance(a, b, p0, p1) -> float:
    """Distance from the ellipse boundary to the infinite line through p0, p1."""
    d = np.subtract(p1, p0, dtype=float)
    n = np.array([-d[1], d[0]]) / np.hypot(*d)
    return _refine_1d(lambda t: np.abs((a * np.cos(t) - p0[0]) * n[0] + (b * np.sin(t) - p0[1]) * n[1]))


def brute_force_distance(ellipse: Ellipse, polygon: ConvexPolygon, pose: SE2Pose) -> float:
    """Ellipse-to-polygon distance for disjoint shapes by nested sampling over (edge, t)."""
    R = ellipse.pose.R
    verts = (polygon.world_vertices(pose) - ellipse.pose.q) @ R  # into the ellipse frame
    a, b = ellipse.shape.a, ellipse.shape.b
    edges = polygon.edges

    def f(t):
        ex, ey = a * np.cos(t), b * np.sin(t)
        return np.min([_point_segment_sq(ex, ey, *verts[i], *verts[j]) for i, j in edges], axis=0)

    return math.sqrt(_refine_1d(f))


# -- random scenes ------------------------------------------------------------


def random_polygon(rng, m=None) -> ConvexPolygon:
    if m is None:
        m = int(rng.integers(2, 8))
    if m == 2:
        return ConvexPolygon([[0.0, 0.0], [rng.uniform(0.3, 2.0), 0.0]])
    while True:
        pts = rng.uniform(-1.0, 1.0, size=(m + 3, 2)) * rng.uniform(0.3, 1.5, size=2)
        hull = ConvexHull(pts)
        v = pts[hull.vertices]  # counter-clockwise for 2-D hulls
        edges = np.roll(v, -1, axis=0) - v
        if len(v) >= 3 and np.min(np.hypot(*edges.T)) > 1e-3:
            return ConvexPolygon(v - v.mean(axis=0))


def polygon_overlaps(ellipse: Ellipse, polygon: ConvexPolygon, pose: SE2Pose) -> bool:
    """True if the shapes overlap, by sampling."""
    verts = (polygon.world_vertices(pose) - ellipse.pose.q) @ ellipse.pose.R
    a, b = ellipse.shape.a, ellipse.shape.b
    # any polygon point inside the ellipse
    s = np.linspace(0.0, 1.0, 200)
    for i, j in polygon.edges:
        seg = verts[i] + s[:, None] * (verts[j] - verts[i])
        if np.any((seg[:, 0] / a) ** 2 + (seg[:, 1] / b) ** 2 <= 1.0):
            return True
    # ellipse center inside the polygon
    if len(verts) >= 3:
        cross = [(verts[j][0] - verts[i][0]) * (-verts[i][1]) - (verts[j][1] - verts[i][1]) * (-verts[i][0]) for i, j in polygon.edges]
        if all(c > 0 for c in cross):
            return True
    return False


def random_scene(rng, m=None, clearance=1e-3, oracle=True):
    """(ellipse, polygon, robot pose, sampled distance) with shapes at least ``clearance`` apart.

    With ``oracle=False`` the separation is checked with the library distance
    and the returned distance is None; use it only where the distance itself
    is not what is being tested.
    """
    while True:
        ellipse = Ellipse.make(*rng.uniform(0.2, 3.0, 2), *rng.uniform(-5, 5, 2), rng.uniform(0, 2 * math.pi))
        polygon = random_polygon(rng, m)
        ang = rng.uniform(0, 2 * math.pi)
        r = max(ellipse.shape.a, ellipse.shape.b) + rng.uniform(-0.5, 3.0)
        q = ellipse.pose.q + r * np.array([math.cos(ang), math.sin(ang)])
        pose = SE2Pose(q, rng.uniform(0, 2 * math.pi))
        if polygon_overlaps(ellipse, polygon, pose):
            continue
        if not oracle:
            if polygon_ellipse_distance(ellipse, polygon, pose).value >= clearance:
                return ellipse, polygon, pose, None
            continue
        d = brute_force_distance(ellipse, polygon, pose)
        if d >= clearance:
            return ellipse, polygon, pose, d


# -- derivatives --------------------------------------------------------------


def central_difference(f, x0, h=1e-6) -> np.ndarray:
    x0 = np.asarray(x0, dtype=float)
    out = np.empty_like(x0)
    for i in range(len(x0)):
        e = np.zeros_like(x0)
        e[i] = h
        out[i] = (f(x0 + e) - f(x0 - e)) / (2 * h)
    return out


# -- QP -----------------------------------------------------------------------


def enumerate_qp(H, c, G, h, tol=1e-9):
    """Optimal value of min 0.5 x'Hx + c'x s.t. Gx <= h by trying every active subset."""
    n = len(c)
    best, best_x = math.inf, None
    for k in range(0, min(n, len(h)) + 1):
        for S in itertools.combinations(range(len(h)), k):
            S = list(S)
            K = np.block([[H, G[S].T], [G[S], np.zeros((k, k))]]) if k else H
            try:
                sol = np.linalg.solve(K, np.r_[-c, h[S]])
            except np.linalg.LinAlgError:
                continue
            x = sol[:n]
            if np.all(G @ x <= h + tol):
                v = 0.5 * x @ H @ x + c @ x
                if v < best:
                    best, best_x = v, x
    return best, best_x


def random_qp(rng, n_max=5, m_max=8):
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(0, m_max + 1))
    M = rng.normal(size=(n, n))
    H = M @ M.T + 0.1 * np.eye(n)
    c = 3.0 * rng.normal(size=n)
    G = rng.normal(size=(m, n))
    h = G @ rng.normal(size=n) + rng.uniform(0.0, 1.0, m)
    return H, c, G, h


# -- quartics -----------------------------------------------------------------


def planted_quartic(rng):
    """Monic quartic with exactly representable coefficients and known real roots.

    Roots (and complex pair parts) are multiples of 1/512 in [-10, 10], so the
    expanded coefficients are exact in double precision and any recall error
    belongs to the solver, not to the test construction.
    """

    def dyadic(lo, hi):
        return round(rng.uniform(lo, hi) * 512) / 512

    n_real = int(rng.choice([0, 2, 4]))
    real = [dyadic(-10, 10) for _ in range(n_real)]
    roots = [complex(r) for r in real]
    for _ in range((4 - n_real) // 2):
        re, im = dyadic(-10, 10), max(dyadic(0, 10), 1 / 512)
        roots += [complex(re, im), complex(re, -im)]
    coeffs = np.real(np.poly(roots))
    return tuple(coeffs[1:]), sorted(real)


def companion_real_roots(c3, c2, c1, c0, imag_tol=1e-7):
    r = np.roots([1.0, c3, c2, c1, c0])
    return np.sort(r[np.abs(r.imag) <= imag_tol * np.maximum(1.0, np.abs(r))].real)
