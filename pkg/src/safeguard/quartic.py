"""Real roots of monic cubics and quartics in closed form (Cardano / Ferrari).

Roots are refined with a few Newton steps on the original polynomial, using
compensated Horner evaluation.  Near a repeated root the closed form loses
about half the digits, so in that regime the solver switches to bracketing:
the real critical points split the axis into monotone pieces, each piece holds
at most one root, and bisection finds it.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Sequence

import numpy as np

MAX_POLISH_STEPS = 20
DISCRIMINANT_RTOL = 1e-12
FACTOR_DISC_RTOL = 1e-8
RESIDUAL_RTOL = 1e-9
BRACKET_INTERVALS = 64


class DegenerateCoefficients(ValueError):
    """Raised when a polynomial coefficient is NaN or infinite."""


class MonicQuartic(NamedTuple):
    """lambda**4 + c3*lambda**3 + c2*lambda**2 + c1*lambda + c0."""

    c3: float
    c2: float
    c1: float
    c0: float

    def __call__(self, x):
        return (((x + self.c3) * x + self.c2) * x + self.c1) * x + self.c0

    def derivative(self, x):
        return ((4.0 * x + 3.0 * self.c3) * x + 2.0 * self.c2) * x + self.c1

    def magnitude(self, x: float) -> float:
        """Sum of absolute term sizes at ``x``; the natural scale for residuals."""
        ax = abs(x)
        return (((ax + abs(self.c3)) * ax + abs(self.c2)) * ax + abs(self.c1)) * ax + abs(self.c0)


def _cubic(p, q, r, x):
    return ((x + p) * x + q) * x + r


def _polish_cubic(p, q, r, x):
    fx = _cubic(p, q, r, x)
    for _ in range(MAX_POLISH_STEPS):
        if fx == 0.0:
            break
        dfx = (3.0 * x + 2.0 * p) * x + q
        if dfx == 0.0:
            break
        xn = x - fx / dfx
        fn = _cubic(p, q, r, xn)
        if abs(fn) >= abs(fx):
            break
        x, fx = xn, fn
    return x


def cubic_real_roots(p: float, q: float, r: float) -> list[float]:
    """All real roots of y**3 + p*y**2 + q*y + r, sorted, repeated roots once."""
    shift = p / 3.0
    A = q - p * shift
    B = (2.0 * p * p / 27.0 - q / 3.0) * p + r
    half_b = 0.5 * B
    third_a = A / 3.0
    disc = half_b * half_b + third_a * third_a * third_a
    if disc > 0.0 or A > 0.0:
        # one real root (A > 0 makes the cubic monotone even if disc underflows); pick the cube root without cancellation
        w = -half_b - math.copysign(math.sqrt(disc), half_b)
        u = math.copysign(abs(w) ** (1.0 / 3.0), w)
        z = u - A / (3.0 * u) if u != 0.0 else 0.0
        roots = [z - shift]
    elif A == 0.0 or (-third_a) ** 1.5 == 0.0:
        roots = [-shift]
    else:
        rad = math.sqrt(-third_a)
        cos_arg = max(-1.0, min(1.0, -half_b / (rad * rad * rad)))
        phi = math.acos(cos_arg) / 3.0
        roots = [2.0 * rad * math.cos(phi - 2.0 * math.pi * k / 3.0) - shift for k in range(3)]
    roots = sorted(_polish_cubic(p, q, r, x) for x in roots)
    out: list[float] = []
    for x in roots:
        if out and abs(x - out[-1]) <= 1e-12 * max(1.0, abs(x)):
            continue
        out.append(x)
    return out


def solve_cubic_resolvent(p: float, q: float, r: float) -> float:
    """One real root (the largest) of the monic cubic y**3 + p*y**2 + q*y + r."""
    for c in (p, q, r):
        if not math.isfinite(c):
            raise DegenerateCoefficients(f"non-finite cubic coefficient {c!r}")
    return cubic_real_roots(p, q, r)[-1]


def _quadratic_real_roots(b: float, c: float) -> tuple[list[float], float]:
    """Real roots of y**2 + b*y + c, and the discriminant relative to its terms."""
    disc = b * b - 4.0 * c
    size = b * b + 4.0 * abs(c)
    rel = abs(disc) / size if size > 0.0 else 0.0
    if disc < 0.0:
        return [], rel
    if disc == 0.0:
        return [-0.5 * b], rel
    sq = math.sqrt(disc)
    y1 = -0.5 * (b + math.copysign(sq, b))
    if y1 == 0.0:
        return [0.0, -b], rel
    return [y1, c / y1], rel


def _ferrari(c3, c2, c1, c0) -> tuple[list[float], float]:
    """Candidate roots, plus the smallest relative discriminant of the quadratic factors."""
    a2 = c3 * c3
    p = c2 - 0.375 * a2
    q = c1 - 0.5 * c3 * c2 + 0.125 * a2 * c3
    r = c0 - 0.25 * c3 * c1 + a2 * c2 / 16.0 - 3.0 * a2 * a2 / 256.0
    shift = 0.25 * c3
    scale = max(abs(p), abs(q), abs(r), 1e-300)
    if abs(q) <= 1e-14 * scale:
        ys = []
        zs, rel = _quadratic_real_roots(p, r)
        for z in zs:
            if z >= 0.0:
                s = math.sqrt(z)
                ys.extend((s, -s))
            if abs(z) <= 1e-8 * scale:
                rel = 0.0
    else:
        m = solve_cubic_resolvent(p, 0.25 * p * p - r, -0.125 * q * q)
        if m <= 0.0:
            m = 1e-300
        s2 = math.sqrt(2.0 * m)
        k = q / (2.0 * s2)
        ys1, rel1 = _quadratic_real_roots(-s2, 0.5 * p + m + k)
        ys2, rel2 = _quadratic_real_roots(s2, 0.5 * p + m - k)
        ys, rel = ys1 + ys2, min(rel1, rel2)
    return [y - shift for y in ys], rel


def _discriminant_relative(c3, c2, c1, c0) -> float:
    a2 = c3 * c3
    p = c2 - 0.375 * a2
    q = c1 - 0.5 * c3 * c2 + 0.125 * a2 * c3
    r = c0 - 0.25 * c3 * c1 + a2 * c2 / 16.0 - 3.0 * a2 * a2 / 256.0
    terms = (
        256.0 * r**3,
        -128.0 * p * p * r * r,
        144.0 * p * q * q * r,
        -27.0 * q**4,
        16.0 * p**4 * r,
        -4.0 * p**3 * q * q,
    )
    # measured against the term sizes so cancellation noise reads as "near zero"
    size = sum(abs(t) for t in terms)
    if size == 0.0:
        return 0.0
    return abs(math.fsum(terms)) / size


def _bisect(poly: MonicQuartic, lo: float, hi: float, flo: float) -> float:
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = poly(mid)
        if fm == 0.0:
            return mid
        if (fm < 0.0) == (flo < 0.0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _bracketing_roots(poly: MonicQuartic) -> list[float]:
    bound = 1.0 + max(abs(poly.c3), abs(poly.c2), abs(poly.c1), abs(poly.c0))
    crit = cubic_real_roots(0.75 * poly.c3, 0.5 * poly.c2, 0.25 * poly.c1)
    grid = np.linspace(-bound, bound, BRACKET_INTERVALS + 1).tolist()
    breaks = sorted(set(grid + [c for c in crit if -bound < c < bound]))
    roots = []
    for c in crit:
        if abs(poly(c)) <= 1e-12 * poly.magnitude(c):
            roots.append(c)
    values = [poly(x) for x in breaks]
    for x0, x1, f0, f1 in zip(breaks[:-1], breaks[1:], values[:-1], values[1:]):
        if f0 == 0.0:
            roots.append(x0)
        elif (f0 < 0.0) != (f1 < 0.0) and f1 != 0.0:
            roots.append(_bisect(poly, x0, x1, f0))
    if values[-1] == 0.0:
        roots.append(breaks[-1])
    return roots


_SPLITTER = 134217729.0  # 2**27 + 1


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _two_prod(a, b):
    p = a * b
    t = _SPLITTER * a
    ah = t - (t - a)
    al = a - ah
    t = _SPLITTER * b
    bh = t - (t - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _horner_compensated(poly: MonicQuartic, x: float) -> float:
    """Horner evaluation with error-free transforms (about twice working precision)."""
    s, c = 1.0, 0.0
    for coef in (poly.c3, poly.c2, poly.c1, poly.c0):
        p, pe = _two_prod(s, x)
        s, se = _two_sum(p, coef)
        c = c * x + (pe + se)
    return s + c


def _polish(poly: MonicQuartic, x: float) -> float:
    fx = _horner_compensated(poly, x)
    for _ in range(MAX_POLISH_STEPS):
        if fx == 0.0:
            break
        dfx = poly.derivative(x)
        if dfx == 0.0:
            break
        xn = x - fx / dfx
        if xn == x:
            break
        fn = _horner_compensated(poly, xn)
        if not abs(fn) < abs(fx):
            break
        x, fx = xn, fn
    return x


def solve_monic_quartic(poly: MonicQuartic | Sequence[float]) -> np.ndarray:
    """Sorted real roots of a monic quartic, each repeated root reported once.

    ``poly`` is a :class:`MonicQuartic` or the coefficient sequence
    ``(c3, c2, c1, c0)``.
    """
    poly = MonicQuartic(*(float(c) for c in poly))
    if not all(math.isfinite(c) for c in poly):
        raise DegenerateCoefficients(f"non-finite quartic coefficients {tuple(poly)!r}")

    # rescale so every coefficient of the scaled quartic is at most 1 in size
    s = max(abs(poly.c3), abs(poly.c2) ** 0.5, abs(poly.c1) ** (1.0 / 3.0), abs(poly.c0) ** 0.25)
    if s == 0.0:
        return np.zeros(1)
    scaled = MonicQuartic(poly.c3 / s, poly.c2 / s**2, poly.c1 / s**3, poly.c0 / s**4)

    candidates, factor_rel = _ferrari(*scaled)
    if _discriminant_relative(*scaled) < DISCRIMINANT_RTOL or factor_rel < FACTOR_DISC_RTOL:
        candidates = _bracketing_roots(scaled)

    roots = []
    for y in candidates:
        x = _polish(poly, y * s)
        if abs(poly(x)) <= RESIDUAL_RTOL * max(1.0, poly.magnitude(x)):
            roots.append(x)
    roots.sort()
    merged: list[float] = []
    for x in roots:
        if merged and abs(x - merged[-1]) <= 1e-9 * max(1.0, abs(x)):
            # keep the better of two estimates of the same root
            if abs(poly(x)) < abs(poly(merged[-1])):
                merged[-1] = x
            continue
        merged.append(x)
    return np.array(merged)
