import numpy as np
import pytest

from oracles import enumerate_qp, random_qp
from safeguard.qp import QPStatus, kkt_residual, solve_qp


def objective(H, c, x):
    return 0.5 * x @ H @ x + c @ x


def test_unconstrained_minimizer_returned_when_feasible():
    H = np.diag([2.0, 4.0])
    c = np.array([-2.0, -4.0])
    r = solve_qp(H, c, np.array([[1.0, 1.0]]), np.array([5.0]))
    np.testing.assert_allclose(r.x, [1.0, 1.0])
    assert r.status is QPStatus.OPTIMAL
    assert r.active_set == []


def test_single_active_constraint_projection():
    # min |x - k|^2 subject to a.x >= b, written as -a.x <= -b
    k = np.array([1.0, -2.0, 0.5])
    a = np.array([0.3, 1.0, -2.0])
    b = 4.0
    r = solve_qp(2 * np.eye(3), -2 * k, -a[None, :], np.array([-b]))
    expected = k + a * (b - a @ k) / (a @ a)
    np.testing.assert_allclose(r.x, expected, atol=1e-12)
    assert r.active_set == [0]
    assert r.multipliers[0] > 0


def test_no_constraints():
    r = solve_qp(np.eye(2), np.array([1.0, -1.0]), np.zeros((0, 2)), np.zeros(0))
    np.testing.assert_allclose(r.x, [-1.0, 1.0])
    assert r.status is QPStatus.OPTIMAL


def test_matches_enumeration_oracle():
    rng = np.random.default_rng(30)
    for _ in range(400):
        H, c, G, h = random_qp(rng)
        best, _ = enumerate_qp(H, c, G, h)
        r = solve_qp(H, c, G, h)
        assert r.status is QPStatus.OPTIMAL
        assert abs(objective(H, c, r.x) - best) <= 1e-7 * max(1.0, abs(best))
        assert r.kkt_residual < 1e-8
        assert r.kkt_residual == pytest.approx(kkt_residual(H, c, G, h, r.x, r.multipliers))


def test_redundant_and_parallel_rows():
    # duplicated and parallel constraints must not break the working-set solves
    H = np.eye(2)
    c = np.array([-3.0, -3.0])
    G = np.array([[1.0, 0.0], [2.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    h = np.array([1.0, 2.0, 1.0, 1.0, 2.0])
    r = solve_qp(H, c, G, h)
    assert r.status is QPStatus.OPTIMAL
    np.testing.assert_allclose(r.x, [1.0, 1.0], atol=1e-12)
    assert r.kkt_residual < 1e-8


def test_deterministic():
    rng = np.random.default_rng(31)
    H, c, G, h = random_qp(rng, 5, 8)
    a, b = solve_qp(H, c, G, h), solve_qp(H, c, G, h)
    np.testing.assert_array_equal(a.x, b.x)
    assert a.active_set == b.active_set


def test_soft_rows_relaxed_when_infeasible():
    # x <= 1 (hard) and x >= 3 (soft) cannot both hold
    r = solve_qp(np.eye(1), np.zeros(1), np.array([[1.0], [-1.0]]), np.array([1.0, -3.0]), soft=[False, True])
    assert r.status is QPStatus.INFEASIBLE_RELAXED
    assert r.x[0] == pytest.approx(1.0)
    assert r.max_violation == pytest.approx(2.0)


def test_hard_infeasible_fails():
    r = solve_qp(np.eye(1), np.zeros(1), np.array([[1.0], [-1.0]]), np.array([1.0, -3.0]))
    assert r.status is QPStatus.FAILED


def test_iteration_cap_reports_failure():
    H = np.eye(2)
    c = np.array([-5.0, -5.0])
    G = np.array([[1.0, 0.0], [0.0, 1.0]])
    h = np.array([1.0, 1.0])
    r = solve_qp(H, c, G, h, x0=np.zeros(2), max_iter=1)
    assert r.status is QPStatus.FAILED
    assert solve_qp(H, c, G, h, x0=np.zeros(2)).status is QPStatus.OPTIMAL
