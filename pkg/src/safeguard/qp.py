"""Small dense strictly convex QP solver (primal active set).

Solves

    minimize    0.5 x^T H x + c^T x
    subject to  G x <= h

for positive definite ``H``.  Equality-constrained subproblems use a Cholesky
range-space solve.  Pivoting follows Bland's rule (smallest index first) for
both the blocking constraint and the constraint dropped on a negative
multiplier, which keeps the iteration deterministic.

A feasible start is taken from the caller, the unconstrained minimizer, or a
phase-one LP (``scipy.optimize.linprog``).  Rows listed as ``soft`` may be
relaxed by that LP: if no point satisfies them together with the hard rows,
the solver returns the point minimizing their largest violation and reports
``INFEASIBLE_RELAXED``.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.optimize import linprog

log = logging.getLogger(__name__)

FEAS_TOL = 1e-10
STEP_TOL = 1e-13


class QPStatus(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE_RELAXED = "Infeasible-Relaxed"
    FAILED = "Failed"


@dataclass
class QPResult:
    x: np.ndarray
    multipliers: np.ndarray
    active_set: list[int]
    status: QPStatus
    iterations: int = 0
    kkt_residual: float = np.inf
    max_violation: float = 0.0
    info: dict = field(default_factory=dict)


def kkt_residual(H, c, G, h, x, lam) -> float:
    """Largest violation among stationarity, primal/dual feasibility and complementarity."""
    if len(h) == 0:
        return float(np.max(np.abs(H @ x + c), initial=0.0))
    slack = h - G @ x
    return float(
        max(
            np.max(np.abs(H @ x + c + G.T @ lam)),
            np.max(-slack, initial=0.0),
            np.max(-lam, initial=0.0),
            np.max(np.abs(lam * slack), initial=0.0),
        )
    )


def _eqp(chol, c, A, b):
    """Minimize 0.5 x'Hx + c'x subject to A x = b; returns (x, mu) with H x + c + A' mu = 0."""
    hinv_c = cho_solve(chol, c)
    if len(A) == 0:
        return -hinv_c, np.zeros(0)
    hinv_at = cho_solve(chol, A.T)
    S = A @ hinv_at
    mu = cho_solve(cho_factor(S), -(b + A @ hinv_c))
    return -(hinv_c + hinv_at @ mu), mu


def _phase_one(G, h, soft, n):
    """LP: minimize s subject to G_soft x - s <= h_soft, G_hard x <= h_hard, s >= -1."""
    m = len(h)
    A = np.zeros((m, n + 1))
    A[:, :n] = G
    A[soft, n] = -1.0
    cost = np.zeros(n + 1)
    cost[n] = 1.0
    bounds = [(None, None)] * n + [(-1.0, None)]
    res = linprog(cost, A_ub=A, b_ub=h, bounds=bounds, method="highs")
    if res.status != 0:
        return None, np.inf
    return res.x[:n], float(res.x[n])


def _initial_working_set(G, h, x, row_scale) -> list[int]:
    """Active rows at ``x``, keeping a linearly independent subset in index order."""
    W: list[int] = []
    slack = h - G @ x
    for i in np.flatnonzero(np.abs(slack) <= 1e-9 * row_scale * (1.0 + np.abs(h))):
        cand = W + [int(i)]
        if np.linalg.matrix_rank(G[cand], tol=1e-10) == len(cand):
            W = cand
    return W


def solve_qp(H, c, G, h, x0=None, soft=None, max_iter=None) -> QPResult:
    H = np.atleast_2d(np.asarray(H, dtype=float))
    c = np.asarray(c, dtype=float)
    n = len(c)
    G = np.asarray(G, dtype=float).reshape(-1, n)
    h = np.asarray(h, dtype=float).reshape(-1)
    m = len(h)
    soft = np.zeros(m, dtype=bool) if soft is None else np.asarray(soft, dtype=bool)
    if max_iter is None:
        max_iter = 3 * (n + m)
    chol = cho_factor(H)
    row_scale = np.maximum(np.linalg.norm(G, axis=1), 1.0) if m else np.ones(0)

    def feasible(x):
        return m == 0 or bool(np.all(G @ x - h <= FEAS_TOL * row_scale * (1.0 + np.abs(h))))

    x_unc = -cho_solve(chol, c)
    if feasible(x_unc):
        lam = np.zeros(m)
        return QPResult(x_unc, lam, [], QPStatus.OPTIMAL, 0, kkt_residual(H, c, G, h, x_unc, lam))

    x = None
    if x0 is not None and feasible(np.asarray(x0, dtype=float)):
        x = np.array(x0, dtype=float)
    if x is None:
        x, s = _phase_one(G, h, soft, n)
        if x is None:
            return QPResult(x_unc, np.zeros(m), [], QPStatus.FAILED, 0, np.inf, np.inf, {"reason": "phase one failed"})
        if s > FEAS_TOL:
            log.info("QP infeasible: soft rows violated by %.3g at best", s)
            return QPResult(x, np.zeros(m), [], QPStatus.INFEASIBLE_RELAXED, 0, np.inf, s)

    W = _initial_working_set(G, h, x, row_scale)
    at_minimizer = False
    it = 0
    for it in range(1, max_iter + 1):
        A = G[W]
        # step toward the minimizer on the current working set
        target, mu = _eqp(chol, c, A, A @ x if W else np.zeros(0))
        p = target - x
        if at_minimizer or np.linalg.norm(p) <= STEP_TOL * (1.0 + np.linalg.norm(x)):
            at_minimizer = False
            if len(mu) == 0 or np.all(mu >= -FEAS_TOL):
                break
            drop = min(k for k, v in enumerate(mu) if v < -FEAS_TOL)
            W.pop(drop)
            continue
        alpha, block = 1.0, None
        Gp = G @ p
        for i in range(m):
            if i in W or Gp[i] <= STEP_TOL * row_scale[i] * np.linalg.norm(p):
                continue
            step = max(h[i] - G[i] @ x, 0.0) / Gp[i]
            if step < alpha - 1e-15:
                # a row in the span of the working set cannot block in exact arithmetic
                if W and np.linalg.matrix_rank(G[W + [i]], tol=1e-10 * row_scale[i]) <= len(W):
                    continue
                alpha, block = step, i
        if block is None:
            x = target
            at_minimizer = True
        else:
            x = x + alpha * p
            W.append(block)
            W.sort()
    else:
        lam = np.zeros(m)
        return QPResult(x, lam, W, QPStatus.FAILED, max_iter, kkt_residual(H, c, G, h, x, lam), info={"reason": "iteration cap"})

    # one direct solve on the final working set removes accumulated rounding
    A = G[W]
    x_ref, mu = _eqp(chol, c, A, h[W] if W else np.zeros(0))
    if feasible(x_ref):
        x = x_ref
    lam = np.zeros(m)
    lam[W] = mu
    return QPResult(x, lam, list(W), QPStatus.OPTIMAL, it, kkt_residual(H, c, G, h, x, lam))
