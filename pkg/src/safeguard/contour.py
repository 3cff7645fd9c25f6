"""Marching squares on a rectilinear grid, with edge crossings chained into polylines."""

from __future__ import annotations

import numpy as np

# Each case maps to pairs of cell edges joined by a segment.
# Edges: 0 bottom (v00-v10), 1 right (v10-v11), 2 top (v01-v11), 3 left (v00-v01).
_CASES = {
    0: (), 15: (),
    1: ((3, 0),), 14: ((3, 0),),
    2: ((0, 1),), 13: ((0, 1),),
    3: ((3, 1),), 12: ((3, 1),),
    4: ((1, 2),), 11: ((1, 2),),
    6: ((0, 2),), 9: ((0, 2),),
    7: ((3, 2),), 8: ((3, 2),),
}


def _edge_point(xs, ys, Z, i, j, edge, level):
    """Linear interpolation of the crossing on one edge of cell (i, j); Z is indexed [iy, ix]."""
    if edge == 0:
        (x0, y0, z0), (x1, y1, z1) = (xs[i], ys[j], Z[j, i]), (xs[i + 1], ys[j], Z[j, i + 1])
    elif edge == 1:
        (x0, y0, z0), (x1, y1, z1) = (xs[i + 1], ys[j], Z[j, i + 1]), (xs[i + 1], ys[j + 1], Z[j + 1, i + 1])
    elif edge == 2:
        (x0, y0, z0), (x1, y1, z1) = (xs[i], ys[j + 1], Z[j + 1, i]), (xs[i + 1], ys[j + 1], Z[j + 1, i + 1])
    else:
        (x0, y0, z0), (x1, y1, z1) = (xs[i], ys[j], Z[j, i]), (xs[i], ys[j + 1], Z[j + 1, i])
    s = 0.5 if z1 == z0 else (level - z0) / (z1 - z0)
    return (x0 + s * (x1 - x0), y0 + s * (y1 - y0))


def _edge_key(i, j, edge):
    # shared edges get the same key from both neighboring cells
    if edge == 0:
        return ("h", i, j)
    if edge == 2:
        return ("h", i, j + 1)
    if edge == 3:
        return ("v", i, j)
    return ("v", i + 1, j)


def marching_squares(xs, ys, Z, level: float) -> list[np.ndarray]:
    """Polylines of the ``level`` isocontour of ``Z[iy, ix]`` sampled at ``(xs[ix], ys[iy])``.

    Saddle cells are split using the cell-center average.  Closed contours
    come back with the first point repeated at the end.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    Z = np.asarray(Z, dtype=float)
    above = Z >= level
    segments = []
    points = {}
    for j in range(len(ys) - 1):
        for i in range(len(xs) - 1):
            case = int(above[j, i]) | int(above[j, i + 1]) << 1 | int(above[j + 1, i + 1]) << 2 | int(above[j + 1, i]) << 3
            if case in (5, 10):
                center = 0.25 * (Z[j, i] + Z[j, i + 1] + Z[j + 1, i] + Z[j + 1, i + 1]) >= level
                if (case == 5) == center:
                    pairs = ((3, 2), (0, 1))
                else:
                    pairs = ((3, 0), (1, 2))
            else:
                pairs = _CASES[case]
            for e0, e1 in pairs:
                k0, k1 = _edge_key(i, j, e0), _edge_key(i, j, e1)
                for k, e in ((k0, e0), (k1, e1)):
                    if k not in points:
                        points[k] = _edge_point(xs, ys, Z, i, j, e, level)
                segments.append((k0, k1))

    # chain segments through shared edge crossings
    adj: dict = {}
    for a, b in segments:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    used = set()
    lines = []

    def walk(start):
        path = [start]
        cur = start
        while True:
            nxt = None
            for cand in adj[cur]:
                seg = frozenset((cur, cand))
                if seg not in used:
                    nxt = cand
                    used.add(seg)
                    break
            if nxt is None:
                return path
            path.append(nxt)
            cur = nxt
            if cur == start:
                return path

    # open chains start at dangling ends (grid boundary)
    for k in [k for k, v in adj.items() if len(v) == 1]:
        if any(frozenset((k, c)) not in used for c in adj[k]):
            lines.append(walk(k))
    for k in adj:
        if any(frozenset((k, c)) not in used for c in adj[k]):
            lines.append(walk(k))
    return [np.array([points[k] for k in line]) for line in lines]
