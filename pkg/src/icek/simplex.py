"""Dense two-phase tableau simplex with Bland's anti-cycling rule.

Meant for the small linear programs of the witness search (a few hundred
variables at most). Solves

    minimize c @ x   subject to   A_ub @ x <= b_ub,   x free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["LPResult", "solve_lp"]

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration_limit"


@dataclass
class LPResult:
    x: np.ndarray
    fun: float
    status: str
    nit: int

    @property
    def success(self):
        return self.status == OPTIMAL


def _pivot(T, basis, r, c):
    T[r] /= T[r, c]
    col = T[:, c].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])
    basis[r] = c


def _bland(T, basis, n_cols, tol, max_iter, nit):
    """Run primal simplex on tableau ``T`` whose last row holds the reduced
    costs and whose last column holds the right-hand sides."""
    m = T.shape[0] - 1
    while nit < max_iter:
        costs = T[-1, :n_cols]
        neg = np.flatnonzero(costs < -tol)
        if neg.size == 0:
            return OPTIMAL, nit
        c = neg[0]
        col = T[:m, c]
        pos = np.flatnonzero(col > tol)
        if pos.size == 0:
            return UNBOUNDED, nit
        ratios = T[pos, -1] / col[pos]
        best = ratios.min()
        ties = pos[ratios <= best + tol * max(1.0, abs(best))]
        r = ties[np.argmin(basis[ties])]
        _pivot(T, basis, r, c)
        nit += 1
    return ITERATION_LIMIT, nit


def solve_lp(c, A_ub, b_ub, tol=1e-9, max_iter=200_000):
    """Minimize ``c @ x`` over free ``x`` with ``A_ub @ x <= b_ub``."""
    c = np.asarray(c, dtype=float)
    A = np.asarray(A_ub, dtype=float)
    b = np.asarray(b_ub, dtype=float)
    m, n = A.shape

    # x = xp - xm, one slack per row; rows with b < 0 are negated and get an artificial
    flip = b < 0
    sign = np.where(flip, -1.0, 1.0)
    arts = np.flatnonzero(flip)
    n_struct = 2 * n + m
    N = n_struct + arts.size
    T = np.zeros((m + 1, N + 1))
    T[:m, :n] = A * sign[:, None]
    T[:m, n : 2 * n] = -A * sign[:, None]
    T[:m, 2 * n : n_struct] = np.diag(sign)
    T[arts, n_struct + np.arange(arts.size)] = 1.0
    T[:m, -1] = b * sign
    basis = np.where(flip, 0, 2 * n + np.arange(m))
    basis[arts] = n_struct + np.arange(arts.size)

    nit = 0
    if arts.size:
        # phase 1: minimize the sum of artificials
        T[-1, n_struct:N] = 1.0
        T[-1] -= T[arts].sum(axis=0)
        status, nit = _bland(T, basis, N, tol, max_iter, nit)
        if status != OPTIMAL:
            return LPResult(np.full(n, np.nan), np.nan, status, nit)
        if -T[-1, -1] > tol * max(1.0, np.abs(b).max()):
            return LPResult(np.full(n, np.nan), np.nan, INFEASIBLE, nit)
        # drive remaining artificials out of the basis, dropping redundant rows
        keep = np.ones(m + 1, dtype=bool)
        for r in range(m):
            if basis[r] >= n_struct:
                cand = np.flatnonzero(np.abs(T[r, :n_struct]) > tol)
                if cand.size:
                    _pivot(T, basis, r, cand[0])
                else:
                    keep[r] = False
        T = np.delete(T[keep], np.s_[n_struct:N], axis=1)
        basis = basis[keep[:-1]]
        m = T.shape[0] - 1

    # phase 2
    cost = np.concatenate([c, -c, np.zeros(n_struct - 2 * n)])
    T[-1, :] = 0.0
    T[-1, :n_struct] = cost
    T[-1] -= cost[basis] @ T[:m]
    status, nit = _bland(T, basis, n_struct, tol, max_iter, nit)
    y = np.zeros(n_struct)
    y[basis] = T[:m, -1]
    x = y[:n] - y[n : 2 * n]
    if status != OPTIMAL:
        return LPResult(x, np.nan, status, nit)
    return LPResult(x, float(c @ x), status, nit)
