import numpy as np
import pytest
from scipy.optimize import linprog

from icek.simplex import solve_lp


def test_textbook_problem():
    # max 3x + 5y st x <= 4, 2y <= 12, 3x + 2y <= 18  ->  (2, 6), 36
    res = solve_lp([-3, -5], [[1, 0], [0, 2], [3, 2], [-1, 0], [0, -1]], [4, 12, 18, 0, 0])
    assert res.success
    np.testing.assert_allclose(res.x, [2, 6], atol=1e-12)
    assert res.fun == pytest.approx(-36)


def test_negative_rhs_needs_phase_one():
    # x >= 2, y >= 3, minimize x + y
    res = solve_lp([1, 1], [[-1, 0], [0, -1]], [-2, -3])
    assert res.success and res.fun == pytest.approx(5)


def test_infeasible_and_unbounded():
    assert solve_lp([1], [[1], [-1]], [-1, -1]).status == "infeasible"
    assert solve_lp([-1], [[-1]], [0]).status == "unbounded"


def test_degenerate_cycling_example():
    # Beale's example, which cycles under the largest-coefficient rule
    c = [-0.75, 150, -0.02, 6]
    A = [[0.25, -60, -0.04, 9], [0.5, -90, -0.02, 3], [0, 0, 1, 0]] + (-np.eye(4)).tolist()
    b = [0, 0, 1, 0, 0, 0, 0]
    res = solve_lp(c, A, b)
    assert res.success and res.fun == pytest.approx(-0.05)


def test_agrees_with_highs(rng):
    for _ in range(200):
        m, n = rng.integers(2, 12), rng.integers(1, 6)
        A = np.vstack([rng.normal(size=(m, n)), np.eye(n), -np.eye(n)])
        b = np.concatenate([rng.normal(size=m), np.full(2 * n, 5.0)])
        c = rng.normal(size=n)
        ref = linprog(c, A_ub=A, b_ub=b, bounds=(None, None), method="highs")
        res = solve_lp(c, A, b)
        if ref.status == 2:
            assert res.status == "infeasible"
        else:
            assert res.success and res.fun == pytest.approx(ref.fun, abs=1e-7)
