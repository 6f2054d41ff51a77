"""Dense two-phase revised simplex.

Small and dependency-free apart from numpy. Used for the path-formulation
oracle and as an alternative backend for ``lp.solve_lp``. Pricing is
Dantzig's rule until a run of degenerate pivots is seen, then Bland's
rule, which cannot cycle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration_limit"

_PIVOT_TOL = 1e-9
_COST_TOL = 1e-10
_REFACTOR_EVERY = 40
_DEGENERATE_STREAK = 25


@dataclass
class SimplexResult:
    status: str
    x: np.ndarray | None
    objective: float
    iterations: int


class _Revised:
    def __init__(self, A, b, basis, max_iter):
        self.A = A
        self.b = b
        self.basis = list(basis)
        self.max_iter = max_iter
        self.iterations = 0
        self._refactor()

    def _refactor(self):
        self.Binv = np.linalg.inv(self.A[:, self.basis])
        self.xB = self.Binv @ self.b
        self._since_refactor = 0

    def run(self, c, allowed):
        """Minimise ``c @ x`` over the current problem; ``allowed`` masks entering columns."""
        m, n = self.A.shape
        degenerate = 0
        while True:
            if self.iterations >= self.max_iter:
                return ITERATION_LIMIT
            self.iterations += 1
            y = c[self.basis] @ self.Binv
            d = c - y @ self.A
            in_basis = np.zeros(n, dtype=bool)
            in_basis[self.basis] = True
            cand = np.flatnonzero((d < -_COST_TOL) & allowed & ~in_basis)
            if cand.size == 0:
                return OPTIMAL
            if degenerate >= _DEGENERATE_STREAK:
                j = int(cand[0])
            else:
                j = int(cand[np.argmin(d[cand])])
            u = self.Binv @ self.A[:, j]
            rows = np.flatnonzero(u > _PIVOT_TOL)
            if rows.size == 0:
                return UNBOUNDED
            ratios = self.xB[rows] / u[rows]
            best = ratios.min()
            ties = rows[ratios <= best + 1e-12]
            # Bland: leave with the smallest basic variable index among ties
            i = int(min(ties, key=lambda r: self.basis[r]))
            step = max(self.xB[i] / u[i], 0.0)
            degenerate = degenerate + 1 if step <= 1e-12 else 0
            self._pivot(i, j, u, step)

    def _pivot(self, i, j, u, step):
        self.basis[i] = j
        self._since_refactor += 1
        if self._since_refactor >= _REFACTOR_EVERY:
            self._refactor()
            return
        self.xB = self.xB - step * u
        self.xB[i] = step
        piv = u[i]
        row_i = self.Binv[i, :] / piv
        self.Binv -= np.outer(u, row_i)
        self.Binv[i, :] = row_i
        np.maximum(self.xB, 0.0, out=self.xB)


def solve_standard(c, A, b, max_iter=50_000) -> SimplexResult:
    """Minimise ``c @ x`` subject to ``A @ x == b`` and ``x >= 0``."""
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).copy()
    m, n = A.shape
    if m == 0:
        if np.any(c < -_COST_TOL):
            return SimplexResult(UNBOUNDED, None, -np.inf, 0)
        return SimplexResult(OPTIMAL, np.zeros(n), 0.0, 0)
    A = A.copy()
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1

    # reuse unit columns as the starting basis where possible
    basis = [-1] * m
    for j in range(n):
        col = A[:, j]
        nz = np.flatnonzero(col)
        if nz.size == 1 and col[nz[0]] == 1.0 and basis[nz[0]] == -1:
            basis[nz[0]] = j
    missing = [i for i in range(m) if basis[i] == -1]
    n_art = len(missing)
    if n_art:
        art = np.zeros((m, n_art))
        for k, i in enumerate(missing):
            art[i, k] = 1.0
            basis[i] = n + k
        A1 = np.hstack([A, art])
    else:
        A1 = A
    total = n + n_art

    solver = _Revised(A1, b, basis, max_iter)
    if n_art:
        c1 = np.zeros(total)
        c1[n:] = 1.0
        status = solver.run(c1, np.ones(total, dtype=bool))
        if status == ITERATION_LIMIT:
            return SimplexResult(status, None, np.nan, solver.iterations)
        if float(c1[solver.basis] @ solver.xB) > 1e-7 * max(1.0, float(np.abs(b).max())):
            return SimplexResult(INFEASIBLE, None, np.nan, solver.iterations)
        _drive_out_artificials(solver, n)

    allowed = np.zeros(solver.A.shape[1], dtype=bool)
    allowed[:n] = True
    c2 = np.zeros(solver.A.shape[1])
    c2[:n] = c
    status = solver.run(c2, allowed)
    if status != OPTIMAL:
        return SimplexResult(status, None, np.nan, solver.iterations)
    x = np.zeros(solver.A.shape[1])
    x[solver.basis] = solver.xB
    x = x[:n]
    return SimplexResult(OPTIMAL, x, float(c @ x), solver.iterations)


def _drive_out_artificials(solver: _Revised, n: int):
    """Pivot zero-valued artificials out of the basis; drop redundant rows."""
    i = 0
    while i < len(solver.basis):
        if solver.basis[i] < n:
            i += 1
            continue
        row = solver.Binv[i, :] @ solver.A[:, :n]
        in_basis = set(solver.basis)
        cols = [j for j in np.flatnonzero(np.abs(row) > _PIVOT_TOL) if j not in in_basis]
        if cols:
            j = int(cols[0])
            u = solver.Binv @ solver.A[:, j]
            solver._pivot(i, j, u, solver.xB[i] / u[i])
            solver._refactor()
            i += 1
        else:
            keep = [k for k in range(len(solver.basis)) if k != i]
            solver.A = solver.A[keep, :]
            solver.b = solver.b[keep]
            del solver.basis[i]
            solver._refactor()


def linprog(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, lower=None, upper=None, max_iter=50_000) -> SimplexResult:
    """Minimise ``c @ x`` with inequality, equality and finite-lower-bound constraints."""
    c = np.asarray(c, dtype=float)
    n = c.size
    lower = np.zeros(n) if lower is None else np.asarray(lower, dtype=float)
    upper = np.full(n, np.inf) if upper is None else np.asarray(upper, dtype=float)
    if np.any(~np.isfinite(lower)):
        raise ValueError("lower bounds must be finite")
    A_ub = np.zeros((0, n)) if A_ub is None else np.asarray(A_ub, dtype=float).reshape(-1, n)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
    A_eq = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, dtype=float).reshape(-1, n)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)

    # substitute x = lower + z, z >= 0; fixed variables leave the problem
    fixed = np.isfinite(upper) & (upper - lower <= 0)
    if np.any(upper < lower - 1e-12):
        return SimplexResult(INFEASIBLE, None, np.nan, 0)
    free = np.flatnonzero(~fixed)
    b_ub = b_ub - A_ub @ lower
    b_eq = b_eq - A_eq @ lower
    A_ub = A_ub[:, free]
    A_eq = A_eq[:, free]
    width = upper[free] - lower[free]
    bounded = np.flatnonzero(np.isfinite(width))
    if bounded.size:
        ub_rows = np.zeros((bounded.size, free.size))
        ub_rows[np.arange(bounded.size), bounded] = 1.0
        A_ub = np.vstack([A_ub, ub_rows])
        b_ub = np.concatenate([b_ub, width[bounded]])
    m_ub, m_eq, k = A_ub.shape[0], A_eq.shape[0], free.size
    A = np.zeros((m_ub + m_eq, k + m_ub))
    A[:m_ub, :k] = A_ub
    A[:m_ub, k:] = np.eye(m_ub)
    A[m_ub:, :k] = A_eq
    b = np.concatenate([b_ub, b_eq])
    cz = np.concatenate([c[free], np.zeros(m_ub)])
    res = solve_standard(cz, A, b, max_iter=max_iter)
    if res.status != OPTIMAL:
        return res
    x = lower.copy()
    x[free] += res.x[:k]
    return SimplexResult(OPTIMAL, x, float(c @ x), res.iterations)
