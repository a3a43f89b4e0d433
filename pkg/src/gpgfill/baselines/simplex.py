"""Dense two-phase revised simplex for small bounded linear programs.

Solves ``min c@x`` subject to ``A_ub@x <= b_ub``, ``A_eq@x == b_eq`` and
``0 <= x <= upper``. Pricing is Dantzig's rule until too many degenerate
pivots pile up, after which Bland's rule guarantees termination.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-7
REFACTOR_EVERY = 50


class LpIterationLimit(RuntimeError):
    """Raised when the pivot budget runs out; carries the last basis."""

    def __init__(self, iterations: int, basis: np.ndarray):
        super().__init__(f"simplex stopped after {iterations} pivots; last basis {basis.tolist()}")
        self.iterations = iterations
        self.basis = basis


@dataclass
class SimplexResult:
    status: str
    x: Optional[np.ndarray]
    objective: float
    iterations: int
    basis: Optional[np.ndarray] = None


def _as2d(A, ncols):
    if A is None:
        return np.zeros((0, ncols))
    A = np.asarray(A.toarray() if hasattr(A, "toarray") else A, dtype=np.float64)
    return A.reshape(-1, ncols)


class _Tableau:
    """Revised simplex state on ``A x = b, x >= 0`` with an explicit basis inverse."""

    def __init__(self, A: np.ndarray, b: np.ndarray, basis: np.ndarray, max_iter: int):
        self.A = A
        self.b = b
        self.basis = basis.copy()
        self.m, self.n = A.shape
        self.max_iter = max_iter
        self.iterations = 0
        self.degenerate = 0
        self.bland = False
        self._refactor()

    def _refactor(self):
        self.Binv = np.linalg.inv(self.A[:, self.basis])
        self.xB = self.Binv @ self.b
        self.since_refactor = 0

    def run(self, c: np.ndarray, allowed: np.ndarray) -> str:
        """Pivot to optimality for costs ``c``; only ``allowed`` columns may enter."""
        m, n = self.m, self.n
        limit_degenerate = 10 * (m + n)
        while True:
            y = c[self.basis] @ self.Binv
            reduced = c - y @ self.A
            reduced[self.basis] = 0.0
            candidates = np.flatnonzero((reduced < -PIVOT_TOL) & allowed)
            if len(candidates) == 0:
                return "optimal"
            if self.iterations >= self.max_iter:
                raise LpIterationLimit(self.iterations, self.basis)
            if self.bland:
                q = int(candidates[0])
            else:
                q = int(candidates[np.argmin(reduced[candidates])])
            d = self.Binv @ self.A[:, q]
            rows = np.flatnonzero(d > PIVOT_TOL)
            if len(rows) == 0:
                return "unbounded"
            ratios = np.maximum(self.xB[rows], 0.0) / d[rows]
            best = ratios.min()
            tied = rows[ratios <= best + PIVOT_TOL]
            if self.bland:
                r = int(tied[np.argmin(self.basis[tied])])
            else:
                r = int(tied[np.argmax(d[tied])])
            if best <= PIVOT_TOL:
                self.degenerate += 1
                if self.degenerate > limit_degenerate:
                    self.bland = True
            self._pivot(r, q, d)

    def _pivot(self, r: int, q: int, d: np.ndarray):
        self.iterations += 1
        pivot = d[r]
        row = self.Binv[r] / pivot
        self.Binv -= np.outer(d, row)
        self.Binv[r] = row
        step = self.xB[r] / pivot
        self.xB -= step * d
        self.xB[r] = step
        self.basis[r] = q
        self.since_refactor += 1
        if self.since_refactor >= REFACTOR_EVERY:
            self._refactor()


def simplex(
    c,
    A_ub=None,
    b_ub=None,
    A_eq=None,
    b_eq=None,
    upper=None,
    max_iter: Optional[int] = None,
) -> SimplexResult:
    c = np.asarray(c, dtype=np.float64)
    nv = len(c)
    Aub, Aeq = _as2d(A_ub, nv), _as2d(A_eq, nv)
    bub = np.asarray(b_ub if b_ub is not None else [], dtype=np.float64)
    beq = np.asarray(b_eq if b_eq is not None else [], dtype=np.float64)
    ub_idx = [] if upper is None else [j for j, u in enumerate(np.asarray(upper, dtype=float)) if np.isfinite(u)]
    if ub_idx:
        bound_rows = np.zeros((len(ub_idx), nv))
        bound_rows[np.arange(len(ub_idx)), ub_idx] = 1.0
        Aub = np.vstack([Aub, bound_rows])
        bub = np.concatenate([bub, np.asarray(upper, dtype=float)[ub_idx]])
    m_ub, m_eq = len(bub), len(beq)
    m = m_ub + m_eq
    # columns: original | slacks | artificials
    A = np.zeros((m, nv + m_ub))
    A[:m_ub, :nv] = Aub
    A[:m_ub, nv:] = np.eye(m_ub)
    A[m_ub:, :nv] = Aeq
    b = np.concatenate([bub, beq])
    flip = b < 0
    A[flip] *= -1
    b[flip] *= -1
    needs_art = np.flatnonzero(flip | (np.arange(m) >= m_ub))
    art = np.zeros((m, len(needs_art)))
    art[needs_art, np.arange(len(needs_art))] = 1.0
    A = np.hstack([A, art])
    total = A.shape[1]
    n_real = nv + m_ub
    basis = np.arange(nv, nv + m)  # slack of each row
    basis[needs_art] = n_real + np.arange(len(needs_art))
    budget = max_iter if max_iter is not None else 50 * (m + total) + 1000
    if m == 0:
        if np.any(c < -PIVOT_TOL):
            return SimplexResult("unbounded", None, -np.inf, 0)
        return SimplexResult("optimal", np.zeros(nv), 0.0, 0)
    tab = _Tableau(A, b, basis, budget)

    if len(needs_art):
        c1 = np.zeros(total)
        c1[n_real:] = 1.0
        tab.run(c1, np.ones(total, dtype=bool))
        if c1[tab.basis] @ tab.xB > FEAS_TOL:
            return SimplexResult("infeasible", None, np.nan, tab.iterations, tab.basis.copy())
        # pivot remaining zero-level artificials out where possible
        for r in range(m):
            if tab.basis[r] >= n_real:
                row = tab.Binv[r] @ A[:, :n_real]
                cols = np.flatnonzero(np.abs(row) > PIVOT_TOL)
                cols = cols[~np.isin(cols, tab.basis)]
                if len(cols):
                    q = int(cols[0])
                    tab._pivot(r, q, tab.Binv @ A[:, q])
        tab._refactor()
    c2 = np.zeros(total)
    c2[:nv] = c
    allowed = np.zeros(total, dtype=bool)
    allowed[:n_real] = True
    tab.degenerate = 0
    tab.bland = False
    status = tab.run(c2, allowed)
    if status == "unbounded":
        return SimplexResult("unbounded", None, -np.inf, tab.iterations, tab.basis.copy())
    tab._refactor()
    full = np.zeros(total)
    full[tab.basis] = np.maximum(tab.xB, 0.0)
    x = full[:nv]
    return SimplexResult("optimal", x, float(c @ x), tab.iterations, tab.basis.copy())
