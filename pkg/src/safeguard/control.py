"""Quadratic CLF, time-varying distance CBF, and the CLF-CBF quadratic program.

Both certificates are affine in the control, so each condition is carried as
a ``(const, lin)`` pair meaning ``const + lin @ u``.  Class-K gains are
linear (``alpha(s) = gamma * s``); swapping in another function only needs a
different ``const`` term.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .distance import DistanceResult
from .qp import QPStatus, solve_qp
from .robots import MovingObstacle, body_distance, state_gradient
from .se2 import wrap_angle

log = logging.getLogger(__name__)

LGH_SMALL = 1e-9


class NonPositiveDefiniteQ(ValueError):
    pass


class Affine(NamedTuple):
    const: float
    lin: np.ndarray

    def __call__(self, u) -> float:
        return float(self.const + self.lin @ np.asarray(u, dtype=float))


class QuadraticCLF:
    """V(x) = e^T Q e with e = x - x_star, angle components wrapped to (-pi, pi]."""

    def __init__(self, Q, x_star, gamma: float = 2.0, angle_mask=None):
        Q = np.atleast_2d(np.asarray(Q, dtype=float))
        self.x_star = np.asarray(x_star, dtype=float).reshape(-1)
        n = len(self.x_star)
        if Q.shape != (n, n):
            raise ValueError(f"Q must be {n}x{n}, got {Q.shape}")
        if not np.allclose(Q, Q.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(Q).max())):
            raise NonPositiveDefiniteQ("Q is not symmetric")
        try:
            np.linalg.cholesky(Q)
        except np.linalg.LinAlgError:
            raise NonPositiveDefiniteQ("Q is not positive definite") from None
        if not gamma > 0.0:
            raise ValueError("gamma must be positive")
        self.Q = 0.5 * (Q + Q.T)
        self.gamma = float(gamma)
        self.angle_mask = np.zeros(n, dtype=bool) if angle_mask is None else np.asarray(angle_mask, dtype=bool)

    def error(self, x) -> np.ndarray:
        e = np.asarray(x, dtype=float) - self.x_star
        if self.angle_mask.any():
            e[self.angle_mask] = wrap_angle(e[self.angle_mask])
        return e

    def value(self, x) -> float:
        e = self.error(x)
        return float(e @ self.Q @ e)

    def gradient(self, x) -> np.ndarray:
        return 2.0 * self.Q @ self.error(x)

    def clc_terms(self, x, f, g) -> Affine:
        """CLC(u) = L_f V + L_g V u + gamma V as an affine map of u."""
        e = self.error(x)
        grad = 2.0 * self.Q @ e
        return Affine(float(grad @ f + self.gamma * (e @ self.Q @ e)), grad @ g)


def clf_value_and_clc(clf: QuadraticCLF, x, f, g, u):
    """Returns (V, terms, CLC evaluated at u)."""
    terms = clf.clc_terms(x, np.asarray(f, dtype=float), np.asarray(g, dtype=float))
    return clf.value(x), terms, terms(u)


@dataclass
class BarrierEval:
    h: float
    dh_dx: np.ndarray
    dh_dt: float
    terms: Affine
    result: DistanceResult
    body: int
    penetrating: bool


class TimeVaryingCBF:
    """h(x, t): distance between the robot and one moving ellipse.

    For robots made of several bodies (arm links) h is the smallest body
    distance, with the gradient of the minimizing body and ties resolved to
    the lower index.  ``temperature`` switches to a log-sum-exp soft minimum,
    which lower-bounds the hard minimum and has a continuous gradient.
    """

    def __init__(self, model, obstacle: MovingObstacle, gamma: float = 3.0, temperature: float | None = None):
        if not gamma > 0.0:
            raise ValueError("gamma must be positive")
        if temperature is not None and not temperature > 0.0:
            raise ValueError("temperature must be positive")
        self.model = model
        self.obstacle = obstacle
        self.gamma = float(gamma)
        self.temperature = temperature

    def evaluate(self, x, t: float) -> BarrierEval:
        ellipse = self.obstacle.at(t)
        v, w = self.obstacle.motion.velocity_at(t)
        vals, grads, rates, results = [], [], [], []
        for body in self.model.bodies(x):
            res = body_distance(body, ellipse)
            vals.append(res.value)
            grads.append(state_gradient(body, res))
            rates.append(float(res.grad_q @ v + res.grad_theta_obs * w))
            results.append(res)
        k = int(np.argmin(vals))
        if self.temperature is None or len(vals) == 1:
            h, dh_dx, dh_dt = vals[k], grads[k], rates[k]
        else:
            T = self.temperature
            z = -(np.array(vals) - vals[k]) / T
            wts = np.exp(z)
            total = wts.sum()
            h = vals[k] - T * math.log(total)
            wts /= total
            dh_dx = wts @ np.array(grads)
            dh_dt = float(wts @ np.array(rates))
        f = self.model.f(x)
        g = self.model.g(x)
        terms = Affine(float(dh_dx @ f + dh_dt + self.gamma * h), dh_dx @ g)
        return BarrierEval(h, dh_dx, dh_dt, terms, results[k], k, any(r.penetrating for r in results))


def cbc(cbf: TimeVaryingCBF, x, u, t: float) -> float:
    """dh/dx (f + g u) + dh/dt + gamma h; the obstacle motion enters through dh/dt."""
    return cbf.evaluate(x, t).terms(u)


@dataclass
class QPProblem:
    nominal: np.ndarray
    lam: float = 100.0
    clc: Affine | None = None
    cbc: list[Affine] = field(default_factory=list)
    u_lo: np.ndarray | None = None
    u_hi: np.ndarray | None = None


@dataclass
class ControlSolution:
    u: np.ndarray
    delta: float
    status: QPStatus
    kkt_residual: float
    active_set: list[int]
    labels: list[str]
    iterations: int = 0

    @property
    def active_labels(self) -> list[str]:
        return [self.labels[i] for i in self.active_set]


def build_qp(problem: QPProblem):
    """Dense data (H, c, G, h, soft, labels) over z = (u, delta)."""
    k = np.asarray(problem.nominal, dtype=float)
    m = len(k)
    H = np.diag(np.r_[np.full(m, 2.0), 2.0 * problem.lam])
    c = np.r_[-2.0 * k, 0.0]
    rows, rhs, soft, labels = [], [], [], []

    def add(row, b, name, is_soft=False):
        rows.append(row)
        rhs.append(b)
        soft.append(is_soft)
        labels.append(name)

    if problem.clc is not None:
        add(np.r_[problem.clc.lin, -1.0], -problem.clc.const, "clc")
    for i, a in enumerate(problem.cbc):
        add(np.r_[-a.lin, 0.0], a.const, f"cbc{i}", True)
    add(np.r_[np.zeros(m), -1.0], 0.0, "delta")
    for j in range(m):
        if problem.u_hi is not None and math.isfinite(problem.u_hi[j]):
            e = np.zeros(m + 1)
            e[j] = 1.0
            add(e, float(problem.u_hi[j]), f"u{j}_hi")
        if problem.u_lo is not None and math.isfinite(problem.u_lo[j]):
            e = np.zeros(m + 1)
            e[j] = -1.0
            add(e, -float(problem.u_lo[j]), f"u{j}_lo")
    return H, c, np.array(rows), np.array(rhs), np.array(soft), labels


def solve_clf_cbf_qp(problem: QPProblem) -> ControlSolution:
    """min |u - k|^2 + lam delta^2 s.t. CLC <= delta, CBC_i >= 0, delta >= 0, bounds.

    Only the CLF row carries the slack.  When the barrier rows cannot all hold
    within the bounds, the returned control minimizes their largest violation
    and the status is ``INFEASIBLE_RELAXED``.
    """
    H, c, G, h, soft, labels = build_qp(problem)
    m = len(problem.nominal)
    u0 = np.asarray(problem.nominal, dtype=float)
    if problem.u_lo is not None:
        u0 = np.maximum(u0, problem.u_lo)
    if problem.u_hi is not None:
        u0 = np.minimum(u0, problem.u_hi)
    d0 = max(0.0, problem.clc(u0)) if problem.clc is not None else 0.0
    res = solve_qp(H, c, G, h, x0=np.r_[u0, d0], soft=soft)
    u = res.x[:m].copy()
    delta = float(res.x[m])
    if res.status is not QPStatus.OPTIMAL:
        delta = max(0.0, problem.clc(u)) if problem.clc is not None else 0.0
        log.info("control QP status %s", res.status.value)
    return ControlSolution(u, delta, res.status, res.kkt_residual, res.active_set, labels, res.iterations)
